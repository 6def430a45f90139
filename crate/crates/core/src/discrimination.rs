//! Subchannel ensembles, POVMs, and discrimination success probabilities.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::free_sets::FreeSet;
use crate::linalg::eigen::{eig_matrix, eigvalsh, min_eigenvalue};
use crate::linalg::hermitian::{HermitianOperator, QuantumState};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::ops::trace_norm;
use crate::sdp::{self, hermitian_basis, LmiBlock, SdpProblem, SdpSettings};
use crate::tolerances::Tolerances;

/// Completely positive trace-nonincreasing map in Kraus form.
#[derive(Debug, Clone)]
pub struct Subchannel {
    kraus: Vec<ComplexMatrix>,
    label: String,
}

impl Subchannel {
    pub fn new(kraus: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let sub = Self::unchecked(kraus, label)?;
        let excess = -min_eigenvalue(&(&ComplexMatrix::identity(sub.dim_in()) - &sub.kraus_sum()));
        if excess > Tolerances::DEFAULT.subchannel {
            return Err(Error::InvalidChannel(format!("subchannel '{}' increases trace by {excess:e}", sub.label)));
        }
        Ok(sub)
    }

    fn unchecked(kraus: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let Some(first) = kraus.first() else {
            return Err(Error::InvalidChannel(format!("subchannel '{label}' has no Kraus operators")));
        };
        let (r, c) = (first.rows(), first.cols());
        if kraus.iter().any(|k| k.rows() != r || k.cols() != c) {
            return Err(Error::InvalidChannel(format!("subchannel '{label}' has Kraus operators of different shapes")));
        }
        Ok(Subchannel { kraus, label })
    }

    /// `η ↦ U η U†`
    pub fn unitary(u: &ComplexMatrix, weight: f64, label: impl Into<String>) -> Result<Self> {
        Self::new(vec![u.scale(weight.sqrt())], label)
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim_in(&self) -> usize {
        self.kraus[0].cols()
    }

    pub fn dim_out(&self) -> usize {
        self.kraus[0].rows()
    }

    /// `Σ K†K`
    pub fn kraus_sum(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.dim_in(), self.dim_in());
        for k in &self.kraus {
            s += &k.adjoint().matmul(k);
        }
        s
    }

    /// `Σ K η K†`
    pub fn apply(&self, eta: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out(), self.dim_out());
        for k in &self.kraus {
            out += &k.conjugate(eta);
        }
        out
    }

    /// Heisenberg picture `Σ K† M K`.
    pub fn adjoint_apply(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_in(), self.dim_in());
        for k in &self.kraus {
            out += &k.adjoint_conjugate(m);
        }
        out
    }

    /// `K ↦ A K B` for every Kraus operator.
    pub fn compose(&self, before: Option<&ComplexMatrix>, after: Option<&ComplexMatrix>, weight: f64, label: impl Into<String>) -> Result<Self> {
        let kraus = self
            .kraus
            .iter()
            .map(|k| {
                let mut m = k.clone();
                if let Some(b) = before {
                    m = m.matmul(b);
                }
                if let Some(a) = after {
                    m = a.matmul(&m);
                }
                m.scale(weight.sqrt())
            })
            .collect();
        Self::new(kraus, label)
    }
}

/// Subchannels summing to a trace-preserving map.
#[derive(Debug, Clone)]
pub struct Instrument {
    subchannels: Vec<Subchannel>,
}

impl Instrument {
    pub fn new(subchannels: Vec<Subchannel>) -> Result<Self> {
        let Some(first) = subchannels.first() else {
            return Err(Error::InvalidChannel("instrument needs at least one subchannel".into()));
        };
        let (di, dout) = (first.dim_in(), first.dim_out());
        if subchannels.iter().any(|s| s.dim_in() != di || s.dim_out() != dout) {
            return Err(Error::InvalidChannel("subchannels have different dimensions".into()));
        }
        let mut total = ComplexMatrix::zeros(di, di);
        for s in &subchannels {
            total += &s.kraus_sum();
        }
        let residual = total.max_abs_diff(&ComplexMatrix::identity(di));
        if residual > Tolerances::DEFAULT.completeness {
            return Err(Error::InvalidChannel(format!("subchannels do not sum to a trace-preserving map (residual {residual:e})")));
        }
        Ok(Instrument { subchannels })
    }

    /// Single trace-preserving channel.
    pub fn channel(kraus: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        Self::new(vec![Subchannel::new(kraus, label)?])
    }

    pub fn subchannels(&self) -> &[Subchannel] {
        &self.subchannels
    }

    pub fn len(&self) -> usize {
        self.subchannels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subchannels.is_empty()
    }

    pub fn dim_in(&self) -> usize {
        self.subchannels[0].dim_in()
    }

    pub fn dim_out(&self) -> usize {
        self.subchannels[0].dim_out()
    }

    /// Action of the total map `Λ = Σ_i Ψ_i`.
    pub fn apply_total(&self, eta: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out(), self.dim_out());
        for s in &self.subchannels {
            out += &s.apply(eta);
        }
        out
    }

    /// `Σ_i K†K − I` in max norm.
    pub fn completeness_residual(&self) -> f64 {
        let mut total = ComplexMatrix::zeros(self.dim_in(), self.dim_in());
        for s in &self.subchannels {
            total += &s.kraus_sum();
        }
        total.max_abs_diff(&ComplexMatrix::identity(self.dim_in()))
    }

    /// All Kraus operators of the total map.
    pub fn total_kraus(&self) -> Vec<ComplexMatrix> {
        self.subchannels.iter().flat_map(|s| s.kraus.iter().cloned()).collect()
    }
}

#[derive(Debug, Clone)]
pub enum MeasurementClass {
    Unconstrained,
    /// Every element proportional to a free state.
    Free(FreeSet),
    /// Free and rank one.
    RankOneFree(FreeSet),
}

impl MeasurementClass {
    pub fn name(&self) -> &'static str {
        match self {
            MeasurementClass::Unconstrained => "unconstrained",
            MeasurementClass::Free(_) => "free",
            MeasurementClass::RankOneFree(_) => "rank_one_free",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementClassKind {
    Unconstrained,
    Free,
    RankOneFree,
}

#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
    class: MeasurementClassKind,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::invalid("POVM needs at least one element"));
        };
        let d = first.rows();
        let tol = Tolerances::DEFAULT;
        let mut ops = Vec::with_capacity(elements.len());
        let mut total = ComplexMatrix::zeros(d, d);
        for (i, m) in elements.into_iter().enumerate() {
            if m.rows() != d {
                return Err(Error::invalid("POVM elements have different dimensions"));
            }
            let h = HermitianOperator::new(m)?;
            let lmin = h.min_eigenvalue();
            if lmin < -tol.povm_psd {
                return Err(Error::invalid(format!("POVM element {i} has eigenvalue {lmin:e}")));
            }
            total += h.as_matrix();
            ops.push(h);
        }
        let residual = total.max_abs_diff(&ComplexMatrix::identity(d));
        if residual > tol.completeness {
            return Err(Error::invalid(format!("POVM elements do not sum to identity (residual {residual:e})")));
        }
        Ok(Povm { elements: ops, class: MeasurementClassKind::Unconstrained })
    }

    /// Validates the class constraints as well.
    pub fn with_class(elements: Vec<ComplexMatrix>, class: &MeasurementClass) -> Result<Self> {
        let mut p = Self::new(elements)?;
        match class {
            MeasurementClass::Unconstrained => {}
            MeasurementClass::Free(f) | MeasurementClass::RankOneFree(f) => {
                let rank_one = matches!(class, MeasurementClass::RankOneFree(_));
                for (i, m) in p.elements.iter().enumerate() {
                    let tr = m.trace().re;
                    if tr <= 1e-12 {
                        continue;
                    }
                    if rank_one {
                        let e = eigvalsh(m.as_matrix());
                        if e[e.len() - 2].abs() > 1e-9 * tr {
                            return Err(Error::invalid(format!("POVM element {i} is not rank one")));
                        }
                    }
                    let state = QuantumState::from_trusted(&m.scale(1.0 / tr), false);
                    if !f.membership(&state, 1e-7)? {
                        return Err(Error::invalid(format!("POVM element {i} is not proportional to a free state")));
                    }
                }
                p.class = if rank_one { MeasurementClassKind::RankOneFree } else { MeasurementClassKind::Free };
            }
        }
        Ok(p)
    }

    pub(crate) fn trusted(elements: Vec<ComplexMatrix>, class: MeasurementClassKind) -> Self {
        Povm { elements: elements.iter().map(HermitianOperator::hermitize).collect(), class }
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn class(&self) -> MeasurementClassKind {
        self.class
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn completeness_residual(&self) -> f64 {
        let mut total = ComplexMatrix::zeros(self.dim(), self.dim());
        for m in &self.elements {
            total += m.as_matrix();
        }
        total.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    priors: Vec<f64>,
    states: Vec<QuantumState>,
}

impl Ensemble {
    pub fn new(priors: Vec<f64>, states: Vec<QuantumState>) -> Result<Self> {
        if priors.is_empty() || priors.len() != states.len() {
            return Err(Error::invalid("ensemble needs matching nonempty priors and states"));
        }
        if priors.iter().any(|q| !(*q >= 0.0) || !q.is_finite()) {
            return Err(Error::invalid("priors must be nonnegative"));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > Tolerances::DEFAULT.priors {
            return Err(Error::invalid(format!("priors sum to {total}, expected 1")));
        }
        let d = states[0].dim();
        if states.iter().any(|s| s.dim() != d) {
            return Err(Error::invalid("ensemble states have different dimensions"));
        }
        Ok(Ensemble { priors, states })
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `Σ_i q_i Tr(M_i ρ_i)`
    pub fn success_probability(&self, m: &Povm) -> Result<f64> {
        if m.len() != self.len() || m.dim() != self.dim() {
            return Err(Error::invalid("POVM does not match the ensemble"));
        }
        Ok(self.priors.iter().zip(&self.states).zip(m.elements()).map(|((q, r), e)| q * r.expectation(e)).sum())
    }
}

fn check_task(task: &Instrument, m: &Povm) -> Result<()> {
    if task.len() != m.len() {
        return Err(Error::invalid(format!("{} subchannels but {} POVM elements", task.len(), m.len())));
    }
    if task.dim_out() != m.dim() {
        return Err(Error::invalid("POVM dimension does not match the subchannel output"));
    }
    Ok(())
}

/// `p_succ = Σ_i Tr(M_i Ψ_i(ρ))`
pub fn success_probability(task: &Instrument, m: &Povm, rho: &QuantumState) -> Result<f64> {
    check_task(task, m)?;
    if rho.dim() != task.dim_in() {
        return Err(Error::invalid("state dimension does not match the subchannel input"));
    }
    Ok(task.subchannels().iter().zip(m.elements()).map(|(s, e)| e.re_trace_product(&s.apply(rho.matrix()))).sum())
}

/// `E = Σ_i Ψ_i†(M_i)`, so that `p_succ(ρ) = Tr(Eρ)`.
pub fn effective_observable(task: &Instrument, m: &Povm) -> Result<HermitianOperator> {
    check_task(task, m)?;
    let mut e = ComplexMatrix::zeros(task.dim_in(), task.dim_in());
    for (s, el) in task.subchannels().iter().zip(m.elements()) {
        e += &s.adjoint_apply(el.as_matrix());
    }
    Ok(HermitianOperator::hermitize(&e))
}

/// `max_{σ∈F} p_succ(σ)`
pub fn best_free_probability(task: &Instrument, m: &Povm, f: &FreeSet) -> Result<f64> {
    let e = effective_observable(task, m)?;
    f.support_value(&e)
}

/// Optimal binary discrimination: `p = ½ + ½‖q0ρ0 − q1ρ1‖₁`, measuring the
/// nonnegative and negative eigenspaces of the difference.
pub fn helstrom_binary(rho0: &QuantumState, rho1: &QuantumState, q0: f64, q1: f64) -> Result<(f64, Povm)> {
    if !(q0 >= 0.0 && q1 >= 0.0) || (q0 + q1 - 1.0).abs() > Tolerances::DEFAULT.priors {
        return Err(Error::invalid(format!("priors ({q0}, {q1}) must be nonnegative and sum to 1")));
    }
    if rho0.dim() != rho1.dim() {
        return Err(Error::invalid("states have different dimensions"));
    }
    let mut diff = rho0.matrix().scale(q0);
    diff.add_scaled(-q1, rho1.matrix());
    let diff = HermitianOperator::hermitize(&diff);
    let p = 0.5 + 0.5 * trace_norm(&diff);
    let e = eig_matrix(diff.as_matrix())?;
    let m0 = e.map(|x| if x >= 0.0 { 1.0 } else { 0.0 });
    let m1 = &ComplexMatrix::identity(rho0.dim()) - &m0;
    Ok((p, Povm::trusted(vec![m0, m1], MeasurementClassKind::Unconstrained)))
}

#[derive(Debug, Clone)]
pub struct OptimalMeasurement {
    pub p_opt: f64,
    pub povm: Povm,
    /// Upper bound on the optimum when one was computed.
    pub dual_bound: Option<f64>,
    /// True when the result is only a lower bound from a sampled search.
    pub heuristic: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct OptimalityCheck {
    pub optimal: bool,
    pub min_residual: f64,
    /// Max-norm of the anti-Hermitian part removed from `G`.
    pub hermiticity_residual: f64,
}

/// Verifies `Σ_i q_i ρ_i M_i − q_j ρ_j ⪰ 0` for every `j`.
pub fn check_povm_optimality(ens: &Ensemble, m: &Povm, tol: f64) -> Result<OptimalityCheck> {
    if m.len() != ens.len() || m.dim() != ens.dim() {
        return Err(Error::invalid("POVM does not match the ensemble"));
    }
    let d = ens.dim();
    let mut g = ComplexMatrix::zeros(d, d);
    for ((q, r), e) in ens.priors.iter().zip(&ens.states).zip(m.elements()) {
        g += &r.matrix().matmul(e.as_matrix()).scale(*q);
    }
    let sym = g.hermitian_part();
    let hermiticity_residual = g.max_abs_diff(&sym);
    let mut min_residual = f64::INFINITY;
    for (q, r) in ens.priors.iter().zip(&ens.states) {
        let mut res = sym.clone();
        res.add_scaled(-q, r.matrix());
        min_residual = min_residual.min(min_eigenvalue(&res));
    }
    Ok(OptimalityCheck { optimal: min_residual >= -tol, min_residual, hermiticity_residual })
}

/// Largest number of assignments enumerated exactly for rank-one free POVMs.
const RANK_ONE_ENUMERATION_CAP: usize = 200_000;

pub fn optimal_povm(ens: &Ensemble, class: &MeasurementClass) -> Result<OptimalMeasurement> {
    optimal_povm_seeded(ens, class, 0)
}

/// As [`optimal_povm`]; the seed only matters for the sampled rank-one search.
pub fn optimal_povm_seeded(ens: &Ensemble, class: &MeasurementClass, seed: u64) -> Result<OptimalMeasurement> {
    match class {
        MeasurementClass::Unconstrained => optimal_unconstrained(ens),
        MeasurementClass::Free(f) => optimal_free(ens, f),
        MeasurementClass::RankOneFree(f) => optimal_rank_one_free(ens, f, seed),
    }
}

/// `min Tr Y s.t. Y ⪰ q_i ρ_i`; the dual blocks are the optimal POVM.
fn optimal_unconstrained(ens: &Ensemble) -> Result<OptimalMeasurement> {
    let d = ens.dim();
    let basis = hermitian_basis(d);
    let objective: Vec<f64> = basis.iter().map(|b| b.trace().re).collect();
    let mut p = SdpProblem::new(objective);
    for (q, r) in ens.priors.iter().zip(&ens.states) {
        let mut block = LmiBlock::new(r.matrix().scale(*q), basis.len());
        for (k, b) in basis.iter().enumerate() {
            block.set(k, b.clone());
        }
        p.blocks.push(block);
    }
    let sol = sdp::solve(&p, &SdpSettings::default());
    let mut total = ComplexMatrix::zeros(d, d);
    let clipped: Vec<ComplexMatrix> = sol
        .dual_blocks
        .iter()
        .map(|z| {
            let c = eig_matrix(z).map(|e| e.map(|x| x.max(0.0))).unwrap_or_else(|_| z.clone());
            total += &c;
            c
        })
        .collect();
    let inv_sqrt = eig_matrix(&total)?.map(|x| 1.0 / x.max(1e-300).sqrt());
    let elements: Vec<ComplexMatrix> = clipped.iter().map(|z| inv_sqrt.matmul(z).matmul(&inv_sqrt).hermitian_part()).collect();
    let povm = Povm::trusted(elements, MeasurementClassKind::Unconstrained);
    let p_opt = ens.success_probability(&povm)?;
    let check = check_povm_optimality(ens, &povm, 1e-8)?;
    if !sol.converged && !check.optimal {
        return Err(Error::NonConvergence { iterations: sol.iterations, best_gap: sol.gap() });
    }
    Ok(OptimalMeasurement { p_opt, povm, dual_bound: Some(sol.primal_objective), heuristic: false })
}

fn require_polytope(f: &FreeSet, d: usize) -> Result<()> {
    if !f.is_polytope() {
        return Err(Error::invalid("free measurements need a polytope free set"));
    }
    if f.dim() != d {
        return Err(Error::invalid("free set dimension does not match the ensemble"));
    }
    Ok(())
}

/// Linear program over `M_i = Σ_k c_ik v_k`, solved through its dual
/// `min Tr Y s.t. Tr(Y v_k) ≥ q_i Tr(ρ_i v_k)`.
fn optimal_free(ens: &Ensemble, f: &FreeSet) -> Result<OptimalMeasurement> {
    let d = ens.dim();
    require_polytope(f, d)?;
    // only the component of Y in span{v_k} is constrained; I lies in that span
    let basis = vertex_span_basis(f);
    let objective: Vec<f64> = basis.iter().map(|b| b.trace().re).collect();
    let mut p = SdpProblem::new(objective);
    for (q, r) in ens.priors.iter().zip(&ens.states) {
        for v in f.vertices() {
            let row: Vec<f64> = basis.iter().map(|b| b.re_trace_product(v.matrix())).collect();
            p.linear.push(row, q * r.expectation(v.matrix()));
        }
    }
    let sol = sdp::solve(&p, &SdpSettings::default());
    let nv = f.vertices().len();
    let mut elements = Vec::with_capacity(ens.len());
    for i in 0..ens.len() {
        let mut m = ComplexMatrix::zeros(d, d);
        for (k, v) in f.vertices().iter().enumerate() {
            m.add_scaled(sol.dual_linear[i * nv + k].max(0.0), v.matrix());
        }
        elements.push(m);
    }
    let povm = Povm::trusted(elements, MeasurementClassKind::Free);
    let p_opt = ens.success_probability(&povm)?;
    // Σ_ik c_ik = d for any free POVM, so a Y violating its constraints by at
    // most `viol` still bounds every free strategy by Tr Y + d·viol
    let mut y = ComplexMatrix::zeros(d, d);
    for (b, yj) in basis.iter().zip(&sol.y) {
        y.add_scaled(*yj, b);
    }
    let mut viol: f64 = 0.0;
    for (q, r) in ens.priors.iter().zip(&ens.states) {
        for v in f.vertices() {
            viol = viol.max(q * r.expectation(v.matrix()) - y.re_trace_product(v.matrix()));
        }
    }
    let upper = y.trace().re + d as f64 * viol;
    let certified = povm.completeness_residual() <= 1e-8 && upper - p_opt <= 1e-8;
    if !sol.converged && !certified {
        return Err(Error::NonConvergence { iterations: sol.iterations, best_gap: sol.gap() });
    }
    Ok(OptimalMeasurement { p_opt, povm, dual_bound: Some(upper), heuristic: false })
}

/// Orthonormal basis (under `Re Tr(AB)`) of the real span of the vertices.
fn vertex_span_basis(f: &FreeSet) -> Vec<ComplexMatrix> {
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for v in f.vertices() {
        let mut m = v.matrix().clone();
        for _ in 0..2 {
            for b in &basis {
                let o = b.re_trace_product(&m);
                m.add_scaled(-o, b);
            }
        }
        let n = m.re_trace_product(&m).sqrt();
        if n > 1e-9 {
            basis.push(m.scale(1.0 / n));
        }
    }
    basis
}

fn real_coordinates(m: &ComplexMatrix) -> Vec<f64> {
    m.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Weights `c` with `Σ c_i v_i = I` for linearly independent `v_i`, if they exist.
fn decompose_identity(vectors: &[Vec<f64>], identity: &[f64]) -> Option<Vec<f64>> {
    let k = vectors.len();
    let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| dot(&vectors[i], &vectors[j]));
    let rhs = nalgebra::DVector::from_fn(k, |i, _| dot(&vectors[i], identity));
    let c = gram.cholesky()?.solve(&rhs);
    let mut residual = identity.to_vec();
    for (ci, v) in c.iter().zip(vectors) {
        for (r, x) in residual.iter_mut().zip(v) {
            *r -= ci * x;
        }
    }
    let res = residual.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    (res < 1e-9).then(|| c.iter().copied().collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct RankOneSearch<'a> {
    values: Vec<Vec<f64>>,
    coords: &'a [Vec<f64>],
    identity: Vec<f64>,
    best: f64,
    best_assignment: Vec<Option<usize>>,
    best_weights: Vec<f64>,
}

impl RankOneSearch<'_> {
    fn evaluate(&mut self, assignment: &[Option<usize>]) {
        let chosen: Vec<(usize, usize)> = assignment.iter().enumerate().filter_map(|(i, a)| a.map(|v| (i, v))).collect();
        if chosen.is_empty() {
            return;
        }
        let vecs: Vec<Vec<f64>> = chosen.iter().map(|&(_, v)| self.coords[v].clone()).collect();
        let Some(c) = decompose_identity(&vecs, &self.identity) else { return };
        if c.iter().any(|x| *x < -1e-12) {
            return;
        }
        let value: f64 = chosen.iter().zip(&c).map(|(&(i, v), ci)| ci.max(0.0) * self.values[i][v]).sum();
        if value > self.best + 1e-14 {
            self.best = value;
            self.best_assignment = assignment.to_vec();
            self.best_weights = c;
        }
    }

    fn recurse(&mut self, i: usize, assignment: &mut Vec<Option<usize>>, span: &mut Vec<Vec<f64>>) {
        let n = self.values.len();
        if i == n {
            self.evaluate(assignment);
            return;
        }
        assignment.push(None);
        self.recurse(i + 1, assignment, span);
        assignment.pop();
        let dim = self.identity.len();
        for v in 0..self.coords.len() {
            if assignment.contains(&Some(v)) {
                continue;
            }
            // keep chosen vertices linearly independent
            let mut r = self.coords[v].clone();
            for q in span.iter() {
                let o = dot(q, &r);
                for (x, y) in r.iter_mut().zip(q) {
                    *x -= o * y;
                }
            }
            let nr = dot(&r, &r).sqrt();
            if nr < 1e-9 || span.len() >= dim {
                continue;
            }
            span.push(r.iter().map(|x| x / nr).collect());
            assignment.push(Some(v));
            self.recurse(i + 1, assignment, span);
            assignment.pop();
            span.pop();
        }
    }
}

fn count_assignments(n: usize, v: usize, cap: usize) -> usize {
    // Σ_k C(n,k) P(v,k)
    let mut total = 0usize;
    for k in 0..=n.min(v) {
        let mut term = 1usize;
        for j in 0..k {
            term = term.saturating_mul(n - j).saturating_mul(v - j) / (j + 1);
        }
        total = total.saturating_add(term);
        if total > cap {
            return total;
        }
    }
    total
}

/// Rank-one free POVMs `M_i = c_i |v⟩⟨v|` over pure vertices. Every vertex of
/// the feasible set has linearly independent support, so enumerating those
/// assignments is exact; beyond a size cap a seeded random search is used.
fn optimal_rank_one_free(ens: &Ensemble, f: &FreeSet, seed: u64) -> Result<OptimalMeasurement> {
    let d = ens.dim();
    require_polytope(f, d)?;
    let pure: Vec<&QuantumState> = f.vertices().iter().filter(|v| v.purity() > 1.0 - 1e-10).collect();
    if pure.is_empty() {
        return Err(Error::invalid("free set has no pure vertices"));
    }
    let coords: Vec<Vec<f64>> = pure.iter().map(|v| real_coordinates(v.matrix())).collect();
    let values: Vec<Vec<f64>> = ens
        .priors
        .iter()
        .zip(&ens.states)
        .map(|(q, r)| pure.iter().map(|v| q * r.expectation(v.matrix())).collect())
        .collect();
    let identity = real_coordinates(&ComplexMatrix::identity(d));
    let mut search = RankOneSearch {
        values,
        coords: &coords,
        identity,
        best: f64::NEG_INFINITY,
        best_assignment: Vec::new(),
        best_weights: Vec::new(),
    };
    let n = ens.len();
    let heuristic = count_assignments(n, pure.len(), RANK_ONE_ENUMERATION_CAP) > RANK_ONE_ENUMERATION_CAP;
    if !heuristic {
        search.recurse(0, &mut Vec::with_capacity(n), &mut Vec::new());
    } else {
        for s in 0..16u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(16).wrapping_add(s));
            let mut order: Vec<usize> = (0..pure.len()).collect();
            for _ in 0..2000 {
                order.shuffle(&mut rng);
                let k = (d * d).min(n).min(pure.len());
                let mut outcomes: Vec<usize> = (0..n).collect();
                outcomes.shuffle(&mut rng);
                let mut assignment = vec![None; n];
                for (slot, &o) in outcomes.iter().take(k).enumerate() {
                    assignment[o] = Some(order[slot]);
                }
                search.evaluate(&assignment);
            }
        }
    }
    if search.best_assignment.is_empty() {
        return Err(Error::NonConvergence { iterations: 0, best_gap: f64::INFINITY });
    }
    let mut elements = vec![ComplexMatrix::zeros(d, d); n];
    let mut w = search.best_weights.iter();
    for (i, a) in search.best_assignment.iter().enumerate() {
        if let Some(v) = a {
            elements[i] = pure[*v].matrix().scale(w.next().unwrap().max(0.0));
        }
    }
    let povm = Povm::trusted(elements, MeasurementClassKind::RankOneFree);
    let p_opt = ens.success_probability(&povm)?;
    Ok(OptimalMeasurement { p_opt, povm, dual_bound: None, heuristic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::C64;

    fn ket(v: &[f64]) -> QuantumState {
        QuantumState::from_ket(&v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn helstrom_examples() {
        let (p, _) = helstrom_binary(&ket(&[1.0, 0.0]), &ket(&[0.0, 1.0]), 0.5, 0.5).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (p, m) = helstrom_binary(&ket(&[1.0, 0.0]), &ket(&[s, s]), 0.5, 0.5).unwrap();
        assert!((p - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-12);
        assert!(m.completeness_residual() < 1e-12);
        let (p, _) = helstrom_binary(&ket(&[1.0, 0.0]), &ket(&[1.0, 0.0]), 0.5, 0.5).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(helstrom_binary(&ket(&[1.0, 0.0]), &ket(&[1.0, 0.0]), 0.6, 0.6).is_err());
    }

    #[test]
    fn trine_optimum() {
        let states: Vec<QuantumState> = (0..3)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                ket(&[(a / 2.0).cos(), (a / 2.0).sin()])
            })
            .collect();
        let ens = Ensemble::new(vec![1.0 / 3.0; 3], states).unwrap();
        let r = optimal_povm(&ens, &MeasurementClass::Unconstrained).unwrap();
        assert!((r.p_opt - 2.0 / 3.0).abs() < 1e-8, "{}", r.p_opt);
        assert!(check_povm_optimality(&ens, &r.povm, 1e-8).unwrap().optimal);
    }

    #[test]
    fn computational_povm_checks() {
        let ens = Ensemble::new(vec![0.5, 0.5], vec![ket(&[1.0, 0.0]), ket(&[0.0, 1.0])]).unwrap();
        let good = Povm::new(vec![ComplexMatrix::diagonal(&[1.0, 0.0]), ComplexMatrix::diagonal(&[0.0, 1.0])]).unwrap();
        let c = check_povm_optimality(&ens, &good, 1e-12).unwrap();
        assert!(c.optimal && c.min_residual >= -1e-12);
        let bad = Povm::new(vec![ComplexMatrix::diagonal(&[0.0, 1.0]), ComplexMatrix::diagonal(&[1.0, 0.0])]).unwrap();
        let c = check_povm_optimality(&ens, &bad, 1e-9).unwrap();
        assert!(!c.optimal && (c.min_residual + 0.5).abs() < 1e-12);
        let r = optimal_povm(&ens, &MeasurementClass::Unconstrained).unwrap();
        assert!((r.p_opt - 1.0).abs() < 1e-8);
    }
}
