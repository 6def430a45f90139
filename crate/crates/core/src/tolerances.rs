//! Numerical tolerances shared by every module.
//!
//! Validation routines read from [`Tolerances::DEFAULT`]; solver-facing
//! knobs that a caller may override live in
//! [`SolverOptions`](crate::robustness::SolverOptions).

/// Central tolerance record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative Hermiticity tolerance: `|a_ij - conj(a_ji)| <= hermitian * (1 + max|a|)`.
    pub hermitian: f64,
    /// Allowed deviation of a state's trace from one.
    pub trace: f64,
    /// Most negative eigenvalue accepted for a state.
    pub psd: f64,
    /// `‖U†U - I‖_max` bound for unitaries.
    pub unitary: f64,
    /// Consecutive eigenvalues closer than this form a degenerate cluster.
    pub degeneracy_gap: f64,
    /// Jacobi stops once the off-diagonal Frobenius norm falls below this
    /// fraction of the full Frobenius norm.
    pub jacobi_off_diagonal: f64,
    pub jacobi_max_sweeps: usize,
    /// Bloch vectors may exceed the unit ball by this much.
    pub bloch_radius: f64,
    /// Orthonormality tolerance for user-provided bases.
    pub orthonormal: f64,
    /// `Σ K†K ⪯ I + subchannel` for a single subchannel.
    pub subchannel: f64,
    /// `Σ K†K = I` for instruments, `Σ M = I` for POVMs.
    pub completeness: f64,
    /// Most negative eigenvalue accepted for a POVM element.
    pub povm_psd: f64,
    /// Priors must sum to one within this.
    pub priors: f64,
    /// A unit axis vector may deviate from norm one by this much.
    pub unit_axis: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-12,
        trace: 1e-10,
        psd: 1e-10,
        unitary: 1e-10,
        degeneracy_gap: 1e-9,
        jacobi_off_diagonal: 1e-14,
        jacobi_max_sweeps: 100,
        bloch_radius: 1e-10,
        orthonormal: 1e-10,
        subchannel: 1e-10,
        completeness: 1e-9,
        povm_psd: 1e-10,
        priors: 1e-12,
        unit_axis: 1e-12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::DEFAULT
    }
}
