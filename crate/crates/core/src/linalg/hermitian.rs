use std::ops::Deref;

use crate::error::{Error, Result};
use crate::linalg::eigen::{eig_matrix, min_eigenvalue};
use crate::linalg::matrix::{normalized, ComplexMatrix, C64};
use crate::tolerances::Tolerances;

/// A square matrix that is Hermitian within [`Tolerances::hermitian`].
///
/// The stored matrix is the exact Hermitian part of the input.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid(format!("operator is {}x{}, not square", m.rows(), m.cols())));
        }
        if !m.is_finite() {
            return Err(Error::invalid("operator has non-finite entries"));
        }
        let bound = Tolerances::DEFAULT.hermitian * (1.0 + m.max_abs());
        let residual = m.hermiticity_residual();
        if residual > bound {
            return Err(Error::invalid(format!("operator is not Hermitian (residual {residual:e})")));
        }
        Ok(HermitianOperator(m.hermitian_part()))
    }

    /// Projects onto the Hermitian matrices without validation. For results of
    /// computations that are Hermitian up to rounding.
    pub fn hermitize(m: &ComplexMatrix) -> Self {
        HermitianOperator(m.hermitian_part())
    }

    pub fn identity(d: usize) -> Self {
        HermitianOperator(ComplexMatrix::identity(d))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// `Tr(self · other)`, real for Hermitian pairs.
    pub fn expectation(&self, other: &ComplexMatrix) -> f64 {
        self.0.re_trace_product(other)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.0)
    }

    pub fn operator_norm(&self) -> f64 {
        let e = crate::linalg::eigen::eigvalsh(&self.0);
        e[0].abs().max(e[e.len() - 1].abs())
    }
}

impl Deref for HermitianOperator {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    matrix: HermitianOperator,
    pure: bool,
}

impl QuantumState {
    pub fn new(matrix: HermitianOperator) -> Result<Self> {
        let tol = Tolerances::DEFAULT;
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::invalid(format!("state trace is {tr}, expected 1")));
        }
        let lmin = matrix.min_eigenvalue();
        if lmin < -tol.psd {
            return Err(Error::invalid(format!("state has negative eigenvalue {lmin:e}")));
        }
        Ok(QuantumState { matrix, pure: false })
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// `|ψ⟩⟨ψ|` for the normalized direction of `amplitudes`.
    pub fn from_ket(amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("empty state vector"));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("state vector has non-finite amplitudes"));
        }
        let psi = normalized(amplitudes).ok_or_else(|| Error::invalid("zero state vector"))?;
        Ok(QuantumState { matrix: HermitianOperator::hermitize(&ComplexMatrix::projector(&psi)), pure: true })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        QuantumState { matrix: HermitianOperator(ComplexMatrix::identity(d).scale(1.0 / d as f64)), pure: d == 1 }
    }

    /// Renormalizes a numerically PSD matrix to a state: negative eigenvalues
    /// are clipped and the trace is rescaled. Returns the clipped mass as well.
    pub fn repair(m: &ComplexMatrix) -> Result<(Self, f64)> {
        let e = eig_matrix(m)?;
        let clipped: f64 = e.eigenvalues.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
        let fixed = e.map(|x| x.max(0.0));
        let tr = fixed.trace().re;
        if !(tr > 0.0) {
            return Err(Error::invalid("matrix has no positive part"));
        }
        let state = QuantumState { matrix: HermitianOperator::hermitize(&fixed.scale(1.0 / tr)), pure: false };
        Ok((state, clipped))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_pure_hint(&self) -> bool {
        self.pure
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.as_matrix()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.re_trace_product(self.matrix.as_matrix())
    }

    /// Normalized dominant eigenvector when the state is pure within `1 - purity <= tol`.
    pub fn pure_vector(&self, tol: f64) -> Option<Vec<C64>> {
        if 1.0 - self.purity() > tol {
            return None;
        }
        let e = eig_matrix(self.matrix()).ok()?;
        e.eigenvectors.last().cloned()
    }

    pub fn expectation(&self, observable: &ComplexMatrix) -> f64 {
        self.matrix.re_trace_product(observable)
    }

    /// `p·self + (1-p)·other`
    pub fn mix(&self, p: f64, other: &QuantumState) -> QuantumState {
        let mut m = self.matrix().scale(p);
        m.add_scaled(1.0 - p, other.matrix());
        QuantumState { matrix: HermitianOperator::hermitize(&m), pure: false }
    }

    pub(crate) fn from_trusted(m: &ComplexMatrix, pure: bool) -> Self {
        QuantumState { matrix: HermitianOperator::hermitize(m), pure }
    }
}

/// A square matrix with `‖U†U - I‖_max <= Tolerances::unitary`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator(ComplexMatrix);

impl UnitaryOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid("unitary must be square"));
        }
        let residual = m.adjoint().matmul(&m).max_abs_diff(&ComplexMatrix::identity(m.rows()));
        if residual > Tolerances::DEFAULT.unitary {
            return Err(Error::invalid(format!("matrix is not unitary (residual {residual:e})")));
        }
        Ok(UnitaryOperator(m))
    }

    pub(crate) fn trusted(m: ComplexMatrix) -> Self {
        UnitaryOperator(m)
    }

    pub fn identity(d: usize) -> Self {
        UnitaryOperator(ComplexMatrix::identity(d))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn adjoint(&self) -> UnitaryOperator {
        UnitaryOperator(self.0.adjoint())
    }

    pub fn compose(&self, other: &UnitaryOperator) -> UnitaryOperator {
        UnitaryOperator(self.0.matmul(&other.0))
    }

    /// `U M U†`
    pub fn conjugate(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.0.conjugate(m)
    }
}

impl Deref for UnitaryOperator {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_rejects_asymmetric() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn state_validation() {
        assert!(QuantumState::from_matrix(ComplexMatrix::diagonal(&[0.5, 0.5])).is_ok());
        assert!(QuantumState::from_matrix(ComplexMatrix::diagonal(&[1.5, -0.5])).is_err());
        assert!(QuantumState::from_matrix(ComplexMatrix::diagonal(&[0.5, 0.6])).is_err());
        assert!(QuantumState::from_ket(&[C64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn repair_reports_clipped_mass() {
        let (s, mass) = QuantumState::repair(&ComplexMatrix::diagonal(&[1.01, -0.01])).unwrap();
        assert!((mass - 0.01).abs() < 1e-15);
        assert!((s.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_check() {
        assert!(UnitaryOperator::new(ComplexMatrix::diagonal(&[1.0, 2.0])).is_err());
        assert!(UnitaryOperator::new(ComplexMatrix::diagonal(&[1.0, -1.0])).is_ok());
    }
}
