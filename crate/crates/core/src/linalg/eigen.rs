//! Cyclic complex Jacobi eigensolver for small Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the classical real Jacobi rotation, so the
//! iteration never leaves the Hermitian matrices. Results are post-processed
//! into a reproducible basis: ascending eigenvalues, a canonical basis inside
//! each degenerate cluster, and a fixed phase per eigenvector.

use crate::error::{Error, Result};
use crate::linalg::hermitian::HermitianOperator;
use crate::linalg::matrix::{inner, ComplexMatrix, C64, ZERO};
use crate::tolerances::Tolerances;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<C64>>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("empty spectrum")
    }

    /// `Σ f(x_i) |e_i⟩⟨e_i|`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (x, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let fx = f(*x);
            if fx == 0.0 {
                continue;
            }
            out.add_scaled(fx, &ComplexMatrix::projector(v));
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }

    /// Eigenvector matrix with the eigenvectors as columns.
    pub fn vector_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut v = ComplexMatrix::zeros(d, d);
        for (j, col) in self.eigenvectors.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                v[(i, j)] = *z;
            }
        }
        v
    }
}

/// Eigendecomposition of a validated Hermitian operator.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    eig_matrix(h.as_matrix())
}

/// Eigendecomposition of a square matrix assumed Hermitian; only the
/// Hermitian part is used.
pub fn eig_matrix(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(Error::invalid("eigendecomposition needs a square matrix"));
    }
    if !m.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let tol = Tolerances::DEFAULT;
    let (values, vectors) = jacobi(&m.hermitian_part(), true, &tol);
    Ok(canonicalize(values, vectors.expect("vectors requested"), &tol))
}

/// Ascending eigenvalues only; used in inner loops.
pub fn eigvalsh(m: &ComplexMatrix) -> Vec<f64> {
    let (mut values, _) = jacobi(m, false, &Tolerances::DEFAULT);
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    eigvalsh(m)[0]
}

pub fn max_eigenvalue(m: &ComplexMatrix) -> f64 {
    *eigvalsh(m).last().expect("empty matrix")
}

fn jacobi(input: &ComplexMatrix, want_vectors: bool, tol: &Tolerances) -> (Vec<f64>, Option<ComplexMatrix>) {
    let n = input.rows();
    let mut a = input.clone();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let total = a.frobenius_norm();
    if n == 1 || total == 0.0 {
        return ((0..n).map(|i| a[(i, i)].re).collect(), v);
    }
    for _sweep in 0..tol.jacobi_max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[(p, q)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= tol.jacobi_off_diagonal * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE * 1e3 {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = D P with D = diag(1, conj(phase)) on (p, q).
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                // A <- A G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                // A <- G† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * g_pp + vkq * g_qp;
                        v[(k, q)] = vkp * g_pq + vkq * g_qq;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

fn canonicalize(values: Vec<f64>, vectors: ComplexMatrix, tol: &Tolerances) -> SpectralDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors: Vec<Vec<C64>> = order.iter().map(|&i| vectors.column(i)).collect();

    let mut out_values = Vec::with_capacity(n);
    let mut out_vectors = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sorted_values[end] - sorted_values[end - 1] < tol.degeneracy_gap {
            end += 1;
        }
        if end - start == 1 {
            out_values.push(sorted_values[start]);
            out_vectors.push(fix_phase(sorted_vectors[start].clone()));
        } else {
            let basis = cluster_basis(&sorted_vectors[start..end]);
            out_values.extend_from_slice(&sorted_values[start..end]);
            out_vectors.extend(basis.into_iter().map(fix_phase));
        }
        start = end;
    }
    SpectralDecomposition { eigenvalues: out_values, eigenvectors: out_vectors }
}

/// Canonical orthonormal basis of the span of `vectors`: pivoted Gram-Schmidt
/// over the columns of the cluster projector, ordered by pivot index.
fn cluster_basis(vectors: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = vectors[0].len();
    let k = vectors.len();
    let mut projector = ComplexMatrix::zeros(n, n);
    for v in vectors {
        projector += &ComplexMatrix::projector(v);
    }
    let mut residuals: Vec<Vec<C64>> = (0..n).map(|j| projector.column(j)).collect();
    let mut chosen: Vec<(usize, Vec<C64>)> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = 0;
        let mut best_norm = -1.0;
        for (j, r) in residuals.iter().enumerate() {
            if chosen.iter().any(|(p, _)| *p == j) {
                continue;
            }
            let nr = crate::linalg::matrix::norm(r);
            if nr > best_norm + 1e-12 {
                best = j;
                best_norm = nr;
            }
        }
        let q: Vec<C64> = residuals[best].iter().map(|z| z / best_norm).collect();
        for r in residuals.iter_mut() {
            let overlap = inner(&q, r);
            for (ri, qi) in r.iter_mut().zip(&q) {
                *ri -= qi * overlap;
            }
        }
        chosen.push((best, q));
    }
    chosen.sort_by_key(|(p, _)| *p);
    chosen.into_iter().map(|(_, q)| q).collect()
}

/// Rotates the phase so the first component of largest modulus is real and nonnegative.
fn fix_phase(mut v: Vec<C64>) -> Vec<C64> {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v;
    }
    let pivot = v.iter().position(|z| z.norm() >= max - 1e-12).unwrap_or(0);
    let phase = v[pivot] / v[pivot].norm();
    let rot = phase.conj();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[pivot] = C64::new(v[pivot].re, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ONE;
    use crate::sampling::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pauli_z_spectrum() {
        let z = ComplexMatrix::diagonal(&[1.0, -1.0]);
        let e = eig_matrix(&z).unwrap();
        assert_eq!(e.eigenvalues, vec![-1.0, 1.0]);
        assert!((e.eigenvectors[0][1] - ONE).norm() < 1e-15);
    }

    #[test]
    fn plus_projector_spectrum() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [C64::new(s, 0.0), C64::new(s, 0.0)];
        let e = eig_matrix(&ComplexMatrix::projector(&plus)).unwrap();
        assert!(e.eigenvalues[0].abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_reconstruction_and_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..100 {
            let d = 2 + trial % 7;
            let h = random_hermitian(&mut rng, d);
            let e = eig_matrix(&h).unwrap();
            let scale = 1.0 + h.max_abs();
            assert!(e.reconstruct().max_abs_diff(&h) <= 1e-10 * scale);
            for w in e.eigenvalues.windows(2) {
                assert!(w[0] <= w[1]);
            }
            for (i, vi) in e.eigenvectors.iter().enumerate() {
                for (j, vj) in e.eigenvectors.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((inner(vi, vj) - C64::new(expected, 0.0)).norm() < 1e-10);
                }
                let hv = h.apply(vi);
                let res: f64 = hv
                    .iter()
                    .zip(vi)
                    .map(|(a, b)| (a - b * e.eigenvalues[i]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn phase_convention_and_degenerate_basis_are_reproducible() {
        // identity perturbed only in the last entry: degenerate 2-cluster
        let mut m = ComplexMatrix::identity(3);
        m[(2, 2)] = C64::new(3.0, 0.0);
        let u = crate::linalg::unitaries::fourier_matrix(3).unwrap();
        let rotated = u.as_matrix().conjugate(&m).hermitian_part();
        let a = eig_matrix(&rotated).unwrap();
        let b = eig_matrix(&rotated.scale(1.0)).unwrap();
        for (x, y) in a.eigenvectors.iter().zip(&b.eigenvectors) {
            assert_eq!(x, y);
        }
        for v in &a.eigenvectors {
            let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = v.iter().position(|z| z.norm() >= max - 1e-12).unwrap();
            assert!(v[pivot].im == 0.0 && v[pivot].re >= 0.0);
        }
        assert!(a.reconstruct().max_abs_diff(&rotated) < 1e-12);
    }
}
