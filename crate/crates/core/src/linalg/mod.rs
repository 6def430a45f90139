//! Dense complex linear algebra for small dimensions.

pub mod bloch;
pub mod eigen;
pub mod hermitian;
pub mod matrix;
pub mod ops;
pub mod unitaries;

pub use bloch::{from_bloch, to_bloch, BlochFrame};
pub use eigen::{eig_hermitian, eig_matrix, eigvalsh, max_eigenvalue, min_eigenvalue, SpectralDecomposition};
pub use hermitian::{HermitianOperator, QuantumState, UnitaryOperator};
pub use matrix::{inner, norm, normalized, ComplexMatrix, C64};
pub use ops::{kron, kron_vec, operator_norm, partial_transpose, partial_transpose_matrix, trace_norm};
pub use unitaries::{fourier_matrix, pauli_family, shift_unitaries};

/// Which side of the Bloch map to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlochDirection {
    ToBloch,
    FromBloch,
}
