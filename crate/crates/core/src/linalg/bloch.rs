//! Qubit Bloch-sphere coordinates.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::hermitian::QuantumState;
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::tolerances::Tolerances;

/// Bloch vector with its polar angles and the in-plane rotation axis
/// `n = (sin φ, -cos φ, 0)` perpendicular to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochFrame {
    pub bloch: [f64; 3],
    pub theta: f64,
    pub phi: f64,
    pub axis: [f64; 3],
}

impl BlochFrame {
    pub fn from_vector(r: [f64; 3]) -> Self {
        let len = norm3(r);
        let theta = if len > 0.0 { (r[2] / len).clamp(-1.0, 1.0).acos() } else { 0.0 };
        let mut phi = r[1].atan2(r[0]);
        if phi < 0.0 {
            phi += TAU;
        }
        if phi >= TAU {
            phi -= TAU;
        }
        BlochFrame { bloch: r, theta, phi, axis: [phi.sin(), -phi.cos(), 0.0] }
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self::from_vector([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
    }

    pub fn radius(&self) -> f64 {
        norm3(self.bloch)
    }
}

pub fn norm3(r: [f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

/// Bloch coordinates `(Tr ρX, Tr ρY, Tr ρZ)` of a qubit state.
pub fn to_bloch(rho: &QuantumState) -> Result<BlochFrame> {
    if rho.dim() != 2 {
        return Err(Error::UnsupportedDimension(format!("Bloch map needs a qubit, got dimension {}", rho.dim())));
    }
    Ok(BlochFrame::from_vector(bloch_vector(rho.matrix())))
}

pub(crate) fn bloch_vector(m: &ComplexMatrix) -> [f64; 3] {
    let off = m[(0, 1)] + m[(1, 0)].conj();
    [off.re, -off.im, (m[(0, 0)] - m[(1, 1)]).re]
}

/// `(I + x X + y Y + z Z)/2`
pub fn from_bloch(r: [f64; 3]) -> Result<QuantumState> {
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("Bloch vector has non-finite entries"));
    }
    let len = norm3(r);
    if len > 1.0 + Tolerances::DEFAULT.bloch_radius {
        return Err(Error::invalid(format!("Bloch vector has length {len} > 1")));
    }
    Ok(QuantumState::from_trusted(&bloch_matrix(r), false))
}

pub(crate) fn bloch_matrix(r: [f64; 3]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = C64::new((1.0 + r[2]) / 2.0, 0.0);
    m[(1, 1)] = C64::new((1.0 - r[2]) / 2.0, 0.0);
    m[(0, 1)] = C64::new(r[0] / 2.0, -r[1] / 2.0);
    m[(1, 0)] = C64::new(r[0] / 2.0, r[1] / 2.0);
    m
}

/// Unit ket `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
pub fn ket_from_angles(theta: f64, phi: f64) -> Vec<C64> {
    vec![C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]
}

/// Unit ket with the given Bloch direction (need not be normalized).
pub fn ket_from_direction(r: [f64; 3]) -> Vec<C64> {
    let f = BlochFrame::from_vector(r);
    ket_from_angles(f.theta, f.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn named_states() {
        let zero = QuantumState::from_ket(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert_eq!(to_bloch(&zero).unwrap().bloch, [0.0, 0.0, 1.0]);
        let t = QuantumState::from_ket(&[C64::new(FRAC_1_SQRT_2, 0.0), C64::from_polar(FRAC_1_SQRT_2, std::f64::consts::FRAC_PI_4)])
            .unwrap();
        let b = to_bloch(&t).unwrap().bloch;
        assert!((b[0] - FRAC_1_SQRT_2).abs() < 1e-15 && (b[1] - FRAC_1_SQRT_2).abs() < 1e-15 && b[2].abs() < 1e-15);
        assert_eq!(to_bloch(&QuantumState::maximally_mixed(2)).unwrap().bloch, [0.0, 0.0, 0.0]);
        assert!(matches!(to_bloch(&QuantumState::maximally_mixed(3)), Err(Error::UnsupportedDimension(_))));
        assert!(from_bloch([1.0, 0.1, 0.0]).is_err());
    }

    #[test]
    fn frame_axis_is_unit_and_angles_normalized() {
        let f = BlochFrame::from_vector([0.0, -1.0, 0.0]);
        assert!((f.phi - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        assert!((norm3(f.axis) - 1.0).abs() < 1e-12);
        let g = BlochFrame::from_angles(0.7, 0.3);
        assert!((g.theta - 0.7).abs() < 1e-14 && (g.phi - 0.3).abs() < 1e-14);
    }
}
