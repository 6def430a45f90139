use crate::error::{Error, Result};
use crate::linalg::eigen::eigvalsh;
use crate::linalg::hermitian::HermitianOperator;
use crate::linalg::matrix::{ComplexMatrix, ZERO};

/// Sum of absolute eigenvalues.
pub fn trace_norm(h: &HermitianOperator) -> f64 {
    eigvalsh(h.as_matrix()).iter().map(|x| x.abs()).sum()
}

/// Trace norm of a matrix that must be Hermitian within tolerance.
pub fn trace_norm_checked(m: &ComplexMatrix) -> Result<f64> {
    Ok(trace_norm(&HermitianOperator::new(m.clone())?))
}

/// Operator (spectral) norm of a Hermitian matrix.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    let e = eigvalsh(m);
    e[0].abs().max(e[e.len() - 1].abs())
}

/// Transposes each `dim_b × dim_b` block of a bipartite operator.
pub fn partial_transpose(m: &HermitianOperator, dim_a: usize, dim_b: usize) -> Result<HermitianOperator> {
    Ok(HermitianOperator::hermitize(&partial_transpose_matrix(m.as_matrix(), dim_a, dim_b)?))
}

pub fn partial_transpose_matrix(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    if dim_a == 0 || dim_b == 0 || m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b {
        return Err(Error::invalid(format!(
            "partial transpose of a {}x{} matrix with dims {dim_a}x{dim_b}",
            m.rows(),
            m.cols()
        )));
    }
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for a1 in 0..dim_a {
        for a2 in 0..dim_a {
            for b1 in 0..dim_b {
                for b2 in 0..dim_b {
                    out[(a1 * dim_b + b1, a2 * dim_b + b2)] = m[(a1 * dim_b + b2, a2 * dim_b + b1)];
                }
            }
        }
    }
    Ok(out)
}

/// Tensor product; index `(i·rows_b + k, j·cols_b + l)` holds `a_ij b_kl`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca, rb, cb) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(u: &[crate::linalg::C64], v: &[crate::linalg::C64]) -> Vec<crate::linalg::C64> {
    u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::C64;
    use crate::sampling::{random_complex_matrix, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ket(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn trace_norm_examples() {
        let z = HermitianOperator::new(ComplexMatrix::diagonal(&[1.0, -1.0])).unwrap();
        assert!((trace_norm(&z) - 2.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let diff = &ComplexMatrix::projector(&ket(&[1.0, 0.0])) - &ComplexMatrix::projector(&ket(&[s, s]));
        assert!((trace_norm_checked(&diff).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(trace_norm(&HermitianOperator::new(ComplexMatrix::zeros(3, 3)).unwrap()), 0.0);
        let mut bad = ComplexMatrix::zeros(2, 2);
        bad[(0, 1)] = C64::new(1.0, 0.0);
        assert!(trace_norm_checked(&bad).is_err());
    }

    #[test]
    fn partial_transpose_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = HermitianOperator::new(ComplexMatrix::projector(&ket(&[s, 0.0, 0.0, s]))).unwrap();
        let pt = partial_transpose(&phi, 2, 2).unwrap();
        assert!((pt.min_eigenvalue() + 0.5).abs() < 1e-12);
        let back = partial_transpose(&pt, 2, 2).unwrap();
        assert!(back.max_abs_diff(&phi) == 0.0);
        assert!(partial_transpose(&phi, 2, 3).is_err());
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_complex_matrix(&mut rng, 2, 2);
        let b = random_complex_matrix(&mut rng, 2, 2);
        let c = random_complex_matrix(&mut rng, 2, 2);
        let d = random_complex_matrix(&mut rng, 2, 2);
        let lhs = kron(&a, &b).matmul(&kron(&c, &d));
        let rhs = kron(&a.matmul(&c), &b.matmul(&d));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        assert!((kron(&a, &b).trace() - a.trace() * b.trace()).norm() < 1e-12);
        assert_eq!(kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
        let h = random_hermitian(&mut rng, 2);
        assert!(kron(&h, &h).hermiticity_residual() < 1e-15);
    }
}
