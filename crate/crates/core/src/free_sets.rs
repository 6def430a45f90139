//! Convex sets of free states and the two queries on them: the support value
//! `max_{σ∈F} Tr(σX)` and membership.

use crate::error::{Error, Result};
use crate::linalg::eigen::eig_matrix;
use crate::linalg::hermitian::{HermitianOperator, QuantumState};
use crate::linalg::matrix::{inner, ComplexMatrix, C64, ONE, ZERO};
use crate::linalg::ops::{kron, partial_transpose_matrix};
use crate::linalg::unitaries::{pauli_x, pauli_y, pauli_z};
use crate::sdp::{self, LmiBlock, SdpProblem, SdpSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeSetKind {
    Polytope,
    Incoherent(usize),
    StabilizerQubit,
    StabilizerTwoQubit,
    SeparablePpt { dim_a: usize, dim_b: usize },
}

impl FreeSetKind {
    pub fn name(&self) -> &'static str {
        match self {
            FreeSetKind::Polytope => "polytope",
            FreeSetKind::Incoherent(_) => "incoherent",
            FreeSetKind::StabilizerQubit => "stabilizer_qubit",
            FreeSetKind::StabilizerTwoQubit => "stabilizer_two_qubit",
            FreeSetKind::SeparablePpt { .. } => "separable_ppt",
        }
    }
}

/// What to build; see [`make_free_set`].
#[derive(Debug, Clone, PartialEq)]
pub enum FreeSetSpec {
    Incoherent { dim: usize },
    StabilizerQubit,
    StabilizerTwoQubit,
    SeparablePpt { dim_a: usize, dim_b: usize },
    Polytope { vertices: Vec<QuantumState> },
}

/// A closed convex set of states. Polytope kinds carry their extreme points;
/// the PPT set is described by its defining cone constraints.
#[derive(Debug, Clone)]
pub struct FreeSet {
    kind: FreeSetKind,
    dim: usize,
    vertices: Vec<QuantumState>,
}

pub fn make_free_set(spec: &FreeSetSpec) -> Result<FreeSet> {
    let set = match spec {
        FreeSetSpec::Incoherent { dim } => {
            if *dim < 2 {
                return Err(Error::invalid(format!("incoherent set needs d >= 2, got {dim}")));
            }
            let vertices = (0..*dim).map(|i| QuantumState::from_ket(&basis_vector(*dim, i)).unwrap()).collect();
            FreeSet { kind: FreeSetKind::Incoherent(*dim), dim: *dim, vertices }
        }
        FreeSetSpec::StabilizerQubit => {
            FreeSet { kind: FreeSetKind::StabilizerQubit, dim: 2, vertices: qubit_stabilizer_states() }
        }
        FreeSetSpec::StabilizerTwoQubit => {
            FreeSet { kind: FreeSetKind::StabilizerTwoQubit, dim: 4, vertices: two_qubit_stabilizer_states() }
        }
        FreeSetSpec::SeparablePpt { dim_a, dim_b } => {
            if *dim_a < 2 || *dim_b < 2 {
                return Err(Error::invalid("separable set needs both local dimensions >= 2"));
            }
            if dim_a * dim_b > 6 {
                return Err(Error::UnsupportedDimension(format!(
                    "PPT equals the separable set only up to 2x3; got {dim_a}x{dim_b}"
                )));
            }
            FreeSet { kind: FreeSetKind::SeparablePpt { dim_a: *dim_a, dim_b: *dim_b }, dim: dim_a * dim_b, vertices: Vec::new() }
        }
        FreeSetSpec::Polytope { vertices } => {
            let Some(first) = vertices.first() else {
                return Err(Error::invalid("polytope needs at least one vertex"));
            };
            let dim = first.dim();
            if vertices.iter().any(|v| v.dim() != dim) {
                return Err(Error::invalid("polytope vertices have different dimensions"));
            }
            let set = FreeSet { kind: FreeSetKind::Polytope, dim, vertices: vertices.clone() };
            if !set.contains_maximally_mixed() {
                return Err(Error::NoFullRankFreeState);
            }
            set
        }
    };
    Ok(set)
}

impl FreeSet {
    pub fn kind(&self) -> FreeSetKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Extreme points; empty for the PPT set.
    pub fn vertices(&self) -> &[QuantumState] {
        &self.vertices
    }

    pub fn is_polytope(&self) -> bool {
        !matches!(self.kind, FreeSetKind::SeparablePpt { .. })
    }

    pub fn ppt_dims(&self) -> Option<(usize, usize)> {
        match self.kind {
            FreeSetKind::SeparablePpt { dim_a, dim_b } => Some((dim_a, dim_b)),
            _ => None,
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::invalid(format!("operator dimension {d} does not match free set dimension {}", self.dim)));
        }
        Ok(())
    }

    /// `max_{σ∈F} Tr(σX)`.
    pub fn support_value(&self, x: &HermitianOperator) -> Result<f64> {
        Ok(self.support_point(x.as_matrix())?.0)
    }

    /// Support value together with a maximizing free state. Polytope ties go
    /// to the lowest vertex index.
    pub fn support_point(&self, x: &ComplexMatrix) -> Result<(f64, QuantumState)> {
        self.check_dim(x.rows())?;
        match self.kind {
            FreeSetKind::SeparablePpt { dim_a, dim_b } => ppt_support(x, dim_a, dim_b),
            _ => {
                let (k, v) = self.best_vertex(x);
                Ok((v, self.vertices[k].clone()))
            }
        }
    }

    pub(crate) fn best_vertex(&self, x: &ComplexMatrix) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, v) in self.vertices.iter().enumerate() {
            let val = v.matrix().re_trace_product(x);
            if val > best.1 {
                best = (k, val);
            }
        }
        best
    }

    /// `R(ρ) ≤ tol`; delegates to the robustness solver.
    pub fn membership(&self, rho: &QuantumState, tol: f64) -> Result<bool> {
        if !(tol > 0.0) {
            return Err(Error::invalid("membership tolerance must be positive"));
        }
        self.check_dim(rho.dim())?;
        let cert = crate::robustness::generalized_robustness(rho, self)?;
        Ok(cert.value <= tol)
    }

    /// Whether `I/d` is a convex combination of the vertices.
    fn contains_maximally_mixed(&self) -> bool {
        let d = self.dim;
        let n = self.vertices.len();
        // min t  s.t.  tI ± (Σ w_k v_k − I/d) ⪰ 0,  w ≥ 0
        let mut objective = vec![0.0; n + 1];
        objective[n] = 1.0;
        let mut p = SdpProblem::new(objective);
        let target = ComplexMatrix::identity(d).scale(1.0 / d as f64);
        for sign in [1.0, -1.0] {
            let mut block = LmiBlock::new(target.scale(sign), n + 1);
            for (k, v) in self.vertices.iter().enumerate() {
                block.set(k, v.matrix().scale(sign));
            }
            block.set(n, ComplexMatrix::identity(d));
            p.blocks.push(block);
        }
        for k in 0..n {
            let mut row = vec![0.0; n + 1];
            row[k] = 1.0;
            p.linear.push(row, 0.0);
        }
        let sol = sdp::solve(&p, &SdpSettings::default());
        sol.y[n] <= 1e-8
    }
}

pub(crate) fn basis_vector(d: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d];
    v[i] = ONE;
    v
}

/// The six Bloch-octahedron corners in the order +X, −X, +Y, −Y, +Z, −Z.
fn qubit_stabilizer_states() -> Vec<QuantumState> {
    [pauli_x(), pauli_y(), pauli_z()]
        .iter()
        .flat_map(|p| {
            [1.0, -1.0].map(|sign| {
                let m = (&ComplexMatrix::identity(2) + &p.scale(sign)).scale(0.5);
                QuantumState::from_trusted(&m, true)
            })
        })
        .collect()
}

/// Two-qubit Pauli strings without the identity, as `(label, matrix)`.
fn two_qubit_paulis() -> Vec<ComplexMatrix> {
    let single = [ComplexMatrix::identity(2), pauli_x(), pauli_y(), pauli_z()];
    let mut out = Vec::with_capacity(15);
    for a in 0..4 {
        for b in 0..4 {
            if a == 0 && b == 0 {
                continue;
            }
            out.push(kron(&single[a], &single[b]));
        }
    }
    out
}

/// Common +1 eigenstates of the stabilizer groups `⟨s₁P, s₂Q⟩` over all
/// commuting pairs of distinct Pauli strings and sign choices, deduplicated.
fn two_qubit_stabilizer_states() -> Vec<QuantumState> {
    let paulis = two_qubit_paulis();
    let id = ComplexMatrix::identity(4);
    let mut states: Vec<(ComplexMatrix, Vec<C64>)> = Vec::new();
    for i in 0..paulis.len() {
        for j in (i + 1)..paulis.len() {
            let (p, q) = (&paulis[i], &paulis[j]);
            if p.matmul(q).max_abs_diff(&q.matmul(p)) > 1e-12 {
                continue;
            }
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    let a = &id + &p.scale(s1);
                    let b = &id + &q.scale(s2);
                    let proj = a.matmul(&b).scale(0.25);
                    let e = eig_matrix(&proj).expect("finite projector");
                    let psi = e.eigenvectors.last().unwrap().clone();
                    let dup = states.iter().any(|(_, v)| inner(v, &psi).norm_sqr() > 1.0 - 1e-10);
                    if !dup {
                        states.push((proj, psi));
                    }
                }
            }
        }
    }
    states.into_iter().map(|(_, psi)| QuantumState::from_ket(&psi).unwrap()).collect()
}

/// Traceless Hermitian basis: off-diagonal pairs, then generalized Gell-Mann
/// diagonals `(Σ_{j<l} E_jj − l E_ll)/√(l(l+1))`.
pub(crate) fn traceless_basis(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    for b in sdp::hermitian_basis(d).into_iter().skip(d) {
        out.push(b);
    }
    for l in 1..d {
        let mut diag = vec![0.0; d];
        for v in diag.iter_mut().take(l) {
            *v = 1.0;
        }
        diag[l] = -(l as f64);
        let n = ((l * (l + 1)) as f64).sqrt();
        out.push(ComplexMatrix::diagonal(&diag).scale(1.0 / n));
    }
    out
}

/// `max Tr(σX)` over `σ ⪰ 0`, `σ^{T_B} ⪰ 0`, `Tr σ = 1`, with `σ = I/d + Σ y_k G_k`.
fn ppt_support(x: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<(f64, QuantumState)> {
    let d = dim_a * dim_b;
    let basis = traceless_basis(d);
    let objective: Vec<f64> = basis.iter().map(|g| -g.re_trace_product(x)).collect();
    let mut p = SdpProblem::new(objective);
    let center = ComplexMatrix::identity(d).scale(-1.0 / d as f64);
    let mut plain = LmiBlock::new(center.clone(), basis.len());
    let mut transposed = LmiBlock::new(center, basis.len());
    for (k, g) in basis.iter().enumerate() {
        plain.set(k, g.clone());
        transposed.set(k, partial_transpose_matrix(g, dim_a, dim_b)?);
    }
    p.blocks.push(plain);
    p.blocks.push(transposed);
    let sol = sdp::solve(&p, &SdpSettings::default());
    if !sol.converged && sol.gap() > 1e-7 {
        return Err(Error::NonConvergence { iterations: sol.iterations, best_gap: sol.gap() });
    }
    let mut sigma = ComplexMatrix::identity(d).scale(1.0 / d as f64);
    for (g, yk) in basis.iter().zip(&sol.y) {
        sigma.add_scaled(*yk, g);
    }
    let base = x.trace().re / d as f64;
    // the dual objective bounds the maximum from above
    let value = base - sol.primal_objective.min(sol.dual_objective);
    let (state, _) = QuantumState::repair(&sigma)?;
    Ok((value, state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t_state() -> QuantumState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        QuantumState::from_ket(&[C64::new(s, 0.0), C64::from_polar(s, std::f64::consts::FRAC_PI_4)]).unwrap()
    }

    #[test]
    fn vertex_counts() {
        assert_eq!(make_free_set(&FreeSetSpec::StabilizerQubit).unwrap().vertices().len(), 6);
        assert_eq!(make_free_set(&FreeSetSpec::StabilizerTwoQubit).unwrap().vertices().len(), 60);
        let inc = make_free_set(&FreeSetSpec::Incoherent { dim: 3 }).unwrap();
        for (i, v) in inc.vertices().iter().enumerate() {
            assert_eq!(v.matrix(), &ComplexMatrix::projector(&basis_vector(3, i)));
        }
    }

    #[test]
    fn two_qubit_overlaps() {
        let f = make_free_set(&FreeSetSpec::StabilizerTwoQubit).unwrap();
        let allowed = [0.0, 0.25, 0.5, 1.0];
        for a in f.vertices() {
            assert!((a.purity() - 1.0).abs() < 1e-12);
            for b in f.vertices() {
                let o = a.matrix().re_trace_product(b.matrix());
                assert!(allowed.iter().any(|x| (x - o).abs() < 1e-10), "overlap {o}");
            }
        }
    }

    #[test]
    fn support_values() {
        let inc = make_free_set(&FreeSetSpec::Incoherent { dim: 2 }).unwrap();
        let plus2 = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!((inc.support_value(&HermitianOperator::new(plus2).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        let stab = make_free_set(&FreeSetSpec::StabilizerQubit).unwrap();
        let v = stab.support_value(t_state().operator()).unwrap();
        assert!((v - (1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0).abs() < 1e-15);
        let ppt = make_free_set(&FreeSetSpec::SeparablePpt { dim_a: 2, dim_b: 2 }).unwrap();
        assert!((ppt.support_value(&HermitianOperator::identity(4)).unwrap() - 1.0).abs() < 1e-9);
        // Bell projector: separable overlap is at most 1/2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexMatrix::projector(&[C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]);
        let v = ppt.support_value(&HermitianOperator::new(bell).unwrap()).unwrap();
        assert!((v - 0.5).abs() < 1e-8, "{v}");
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            make_free_set(&FreeSetSpec::SeparablePpt { dim_a: 3, dim_b: 3 }),
            Err(Error::UnsupportedDimension(_))
        ));
        assert!(make_free_set(&FreeSetSpec::SeparablePpt { dim_a: 2, dim_b: 3 }).is_ok());
        let zero = QuantumState::from_ket(&basis_vector(2, 0)).unwrap();
        assert!(matches!(
            make_free_set(&FreeSetSpec::Polytope { vertices: vec![zero.clone()] }),
            Err(Error::NoFullRankFreeState)
        ));
        let one = QuantumState::from_ket(&basis_vector(2, 1)).unwrap();
        assert!(make_free_set(&FreeSetSpec::Polytope { vertices: vec![zero, one] }).is_ok());
        assert!(make_free_set(&FreeSetSpec::Polytope { vertices: vec![] }).is_err());
    }
}
