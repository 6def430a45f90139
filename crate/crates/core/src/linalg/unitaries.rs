//! Unitary families used by the task constructions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::hermitian::UnitaryOperator;
use crate::linalg::matrix::{inner, ComplexMatrix, C64, I, ONE, ZERO};
use crate::tolerances::Tolerances;

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    let mut y = ComplexMatrix::zeros(2, 2);
    y[(0, 1)] = -I;
    y[(1, 0)] = I;
    y
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[1.0, -1.0])
}

pub fn paulis() -> [ComplexMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Cyclic shift `X|j⟩ = |j+1 mod d⟩`.
pub fn shift_matrix(d: usize) -> ComplexMatrix {
    let mut x = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        x[((j + 1) % d, j)] = ONE;
    }
    x
}

/// Clock `Z|j⟩ = ζ^j|j⟩` with `ζ = e^{2πi/d}`.
pub fn clock_matrix(d: usize) -> ComplexMatrix {
    let mut z = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        z[(j, j)] = root_of_unity(d, j);
    }
    z
}

fn root_of_unity(d: usize, k: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * ((k % d) as f64) / d as f64)
}

/// Heisenberg-Weyl operators `X^a Z^b`, ordered by `a` then `b`.
pub fn pauli_family(d: usize) -> Result<Vec<UnitaryOperator>> {
    if d < 2 {
        return Err(Error::invalid(format!("Pauli family needs d >= 2, got {d}")));
    }
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // (X^a Z^b)|j⟩ = ζ^{bj} |j+a⟩
            let mut m = ComplexMatrix::zeros(d, d);
            for j in 0..d {
                m[((j + a) % d, j)] = root_of_unity(d, b * j);
            }
            out.push(UnitaryOperator::trusted(m));
        }
    }
    Ok(out)
}

/// `H_d = (1/√d) Σ ζ^{kj} |k⟩⟨j|`
pub fn fourier_matrix(d: usize) -> Result<UnitaryOperator> {
    if d < 2 {
        return Err(Error::invalid(format!("Fourier matrix needs d >= 2, got {d}")));
    }
    let s = 1.0 / (d as f64).sqrt();
    let mut m = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        for j in 0..d {
            m[(k, j)] = root_of_unity(d, k * j) * s;
        }
    }
    Ok(UnitaryOperator::trusted(m))
}

/// `U_l = Σ_j |e_{j+l}⟩⟨e_j|` for `l = 0..d`.
pub fn shift_unitaries(basis: &[Vec<C64>]) -> Result<Vec<UnitaryOperator>> {
    let d = basis.len();
    if d == 0 || basis.iter().any(|v| v.len() != d) {
        return Err(Error::invalid("basis must contain d vectors of length d"));
    }
    let tol = Tolerances::DEFAULT.orthonormal;
    for i in 0..d {
        for j in 0..d {
            let expected = if i == j { ONE } else { ZERO };
            if (inner(&basis[i], &basis[j]) - expected).norm() > tol {
                return Err(Error::invalid("basis is not orthonormal"));
            }
        }
    }
    Ok((0..d)
        .map(|l| {
            let mut u = ComplexMatrix::zeros(d, d);
            for j in 0..d {
                u += &ComplexMatrix::outer(&basis[(j + l) % d], &basis[j]);
            }
            UnitaryOperator::trusted(u)
        })
        .collect())
}

/// `R_n(θ) = exp(-i θ/2 n·σ) = cos(θ/2) I - i sin(θ/2) n·σ`
pub fn rotation(axis: [f64; 3], theta: f64) -> Result<UnitaryOperator> {
    let len = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if (len - 1.0).abs() > Tolerances::DEFAULT.unit_axis {
        return Err(Error::invalid(format!("rotation axis has norm {len}")));
    }
    let mut n_sigma = ComplexMatrix::zeros(2, 2);
    for (n, p) in axis.iter().zip(paulis().iter()) {
        n_sigma.add_scaled(*n, p);
    }
    let mut u = ComplexMatrix::identity(2).scale((theta / 2.0).cos());
    u += &n_sigma.scale_c(-I * (theta / 2.0).sin());
    Ok(UnitaryOperator::trusted(u))
}

pub fn hadamard() -> UnitaryOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    UnitaryOperator::trusted(ComplexMatrix::from_real(2, 2, &[s, s, s, -s]))
}

pub fn phase_gate() -> UnitaryOperator {
    let mut s = ComplexMatrix::identity(2);
    s[(1, 1)] = I;
    UnitaryOperator::trusted(s)
}

/// Rotation matrix `R_ij = ½ Tr(σ_i U σ_j U†)` of a qubit unitary acting on Bloch vectors.
pub fn bloch_rotation(u: &ComplexMatrix) -> [[f64; 3]; 3] {
    let p = paulis();
    let mut r = [[0.0; 3]; 3];
    for (j, pj) in p.iter().enumerate() {
        let conj = u.conjugate(pj);
        for (i, pi) in p.iter().enumerate() {
            r[i][j] = 0.5 * pi.re_trace_product(&conj);
        }
    }
    r
}

pub fn rotate(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2];
    }
    out
}

/// The 24 single-qubit Clifford unitaries modulo phase, generated from `H` and `S`,
/// each paired with its signed-permutation action on Bloch vectors.
/// The identity comes first; the rest follow breadth-first order.
pub fn qubit_clifford_rotations() -> Vec<(UnitaryOperator, [[i8; 3]; 3])> {
    let gens = [hadamard(), phase_gate()];
    let key = |u: &ComplexMatrix| {
        let r = bloch_rotation(u);
        let mut k = [[0i8; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = r[i][j].round() as i8;
            }
        }
        k
    };
    let id = UnitaryOperator::identity(2);
    let mut seen = vec![(id.clone(), key(id.as_matrix()))];
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for u in &frontier {
            for g in &gens {
                let v = g.compose(u);
                let k = key(v.as_matrix());
                if !seen.iter().any(|(_, s)| *s == k) {
                    seen.push((v.clone(), k));
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    seen
}
