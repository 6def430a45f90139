//! Primal-dual interior-point solver for small complex semidefinite programs.
//!
//! Problems are given in inequality (LMI) form
//!
//! ```text
//! minimize    cᵀy
//! subject to  S_b = Σ_k y_k F_bk − F_b0 ⪰ 0     (Hermitian blocks)
//!             s   = A y − a0 ≥ 0                 (linear block)
//! ```
//!
//! with the dual
//!
//! ```text
//! maximize    Σ_b Tr(F_b0 Z_b) + a0ᵀz
//! subject to  Σ_b Tr(F_bk Z_b) + (Aᵀz)_k = c_k,  Z_b ⪰ 0, z ≥ 0.
//! ```
//!
//! The search direction is the HKM direction with a Mehrotra
//! predictor-corrector step, started from an infeasible interior point.

use nalgebra::{DMatrix, DVector};

use crate::linalg::eigen::eigvalsh;
use crate::linalg::matrix::ComplexMatrix;

/// One Hermitian LMI block. `coefficients[k]` is `F_bk`; `None` means zero.
#[derive(Debug, Clone)]
pub struct LmiBlock {
    pub constant: ComplexMatrix,
    pub coefficients: Vec<Option<ComplexMatrix>>,
}

impl LmiBlock {
    pub fn new(constant: ComplexMatrix, num_vars: usize) -> Self {
        LmiBlock { constant, coefficients: vec![None; num_vars] }
    }

    pub fn dim(&self) -> usize {
        self.constant.rows()
    }

    pub fn set(&mut self, k: usize, f: ComplexMatrix) {
        self.coefficients[k] = Some(f);
    }

    fn evaluate(&self, y: &[f64]) -> ComplexMatrix {
        let mut m = -&self.constant;
        for (f, yk) in self.coefficients.iter().zip(y) {
            if let Some(f) = f {
                m.add_scaled(*yk, f);
            }
        }
        m
    }

    fn apply_linear(&self, dy: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim(), self.dim());
        for (f, yk) in self.coefficients.iter().zip(dy) {
            if let Some(f) = f {
                m.add_scaled(*yk, f);
            }
        }
        m
    }
}

/// Rows `a_j · y − a0_j ≥ 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearBlock {
    pub rows: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl LinearBlock {
    pub fn push(&mut self, row: Vec<f64>, offset: f64) {
        self.rows.push(row);
        self.offsets.push(offset);
    }

    fn len(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
    pub linear: LinearBlock,
}

impl SdpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        SdpProblem { objective, blocks: Vec::new(), linear: LinearBlock::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpSettings {
    /// Target for the relative gap and both relative infeasibilities.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings { tolerance: 1e-10, max_iterations: 100, step_fraction: 0.95 }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub y: Vec<f64>,
    pub slack_blocks: Vec<ComplexMatrix>,
    pub dual_blocks: Vec<ComplexMatrix>,
    pub slack_linear: Vec<f64>,
    pub dual_linear: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SdpSolution {
    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }
}

struct Point {
    y: Vec<f64>,
    s: Vec<ComplexMatrix>,
    z: Vec<ComplexMatrix>,
    sl: Vec<f64>,
    zl: Vec<f64>,
}

struct Direction {
    dy: Vec<f64>,
    ds: Vec<ComplexMatrix>,
    dz: Vec<ComplexMatrix>,
    dsl: Vec<f64>,
    dzl: Vec<f64>,
}

pub fn solve(problem: &SdpProblem, settings: &SdpSettings) -> SdpSolution {
    let m = problem.num_vars();
    let nb = problem.blocks.len();
    let nl = problem.linear.len();
    let barrier_dim = problem.blocks.iter().map(LmiBlock::dim).sum::<usize>() + nl;

    let mut scale = 1.0f64;
    for b in &problem.blocks {
        scale = scale.max(b.constant.max_abs());
        for f in b.coefficients.iter().flatten() {
            scale = scale.max(f.max_abs());
        }
    }
    for c in &problem.objective {
        scale = scale.max(c.abs());
    }
    for (row, off) in problem.linear.rows.iter().zip(&problem.linear.offsets) {
        scale = scale.max(off.abs());
        for a in row {
            scale = scale.max(a.abs());
        }
    }
    let gamma = 10.0 * scale;

    let mut pt = Point {
        y: vec![0.0; m],
        s: problem.blocks.iter().map(|b| ComplexMatrix::identity(b.dim()).scale(gamma)).collect(),
        z: problem.blocks.iter().map(|b| ComplexMatrix::identity(b.dim()).scale(gamma)).collect(),
        sl: vec![gamma; nl],
        zl: vec![gamma; nl],
    };

    let primal_norm = 1.0
        + problem.blocks.iter().map(|b| b.constant.frobenius_norm()).fold(0.0, f64::max)
        + problem.linear.offsets.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let dual_norm = 1.0 + problem.objective.iter().fold(0.0f64, |a, b| a.max(b.abs()));

    let mut iterations = 0;
    let mut converged = false;
    let mut best: Option<(f64, SdpSolution)> = None;

    loop {
        // residuals
        let rb: Vec<ComplexMatrix> =
            problem.blocks.iter().zip(&pt.s).map(|(b, s)| &b.evaluate(&pt.y) - s).collect();
        let rl: Vec<f64> = (0..nl)
            .map(|j| dot(&problem.linear.rows[j], &pt.y) - problem.linear.offsets[j] - pt.sl[j])
            .collect();
        let rd: Vec<f64> = (0..m)
            .map(|k| {
                let mut v = -problem.objective[k];
                for (b, z) in problem.blocks.iter().zip(&pt.z) {
                    if let Some(f) = &b.coefficients[k] {
                        v += f.re_trace_product(z);
                    }
                }
                for j in 0..nl {
                    v += problem.linear.rows[j][k] * pt.zl[j];
                }
                v
            })
            .collect();
        let pobj = dot(&problem.objective, &pt.y);
        let dobj = problem.blocks.iter().zip(&pt.z).map(|(b, z)| b.constant.re_trace_product(z)).sum::<f64>()
            + dot(&problem.linear.offsets, &pt.zl);
        let pinf = (rb.iter().map(|r| r.frobenius_norm().powi(2)).sum::<f64>() + rl.iter().map(|x| x * x).sum::<f64>())
            .sqrt()
            / primal_norm;
        let dinf = rd.iter().map(|x| x * x).sum::<f64>().sqrt() / dual_norm;
        let complementarity =
            pt.s.iter().zip(&pt.z).map(|(s, z)| s.re_trace_product(z)).sum::<f64>() + dot(&pt.sl, &pt.zl);
        let mu = complementarity / barrier_dim.max(1) as f64;
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

        let merit = rel_gap.max(pinf).max(dinf);
        let snapshot = SdpSolution {
            y: pt.y.clone(),
            slack_blocks: pt.s.clone(),
            dual_blocks: pt.z.clone(),
            slack_linear: pt.sl.clone(),
            dual_linear: pt.zl.clone(),
            primal_objective: pobj,
            dual_objective: dobj,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            iterations,
            converged: false,
        };
        if best.as_ref().is_none_or(|(b, _)| merit < *b) {
            best = Some((merit, snapshot));
        }
        if merit <= settings.tolerance && (mu / (1.0 + pobj.abs())) <= settings.tolerance {
            converged = true;
            break;
        }
        if iterations >= settings.max_iterations {
            break;
        }
        iterations += 1;

        // factorizations
        let mut s_inv = Vec::with_capacity(nb);
        let mut chol_inv = Vec::with_capacity(nb);
        let mut z_chol_inv = Vec::with_capacity(nb);
        let mut ok = true;
        for (s, z) in pt.s.iter().zip(&pt.z) {
            match (s.cholesky(), z.cholesky()) {
                (Some(ls), Some(lz)) => {
                    let li = ls.lower_triangular_inverse();
                    s_inv.push(li.adjoint().matmul(&li));
                    chol_inv.push(li);
                    z_chol_inv.push(lz.lower_triangular_inverse());
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }

        // Schur complement
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for (bi, b) in problem.blocks.iter().enumerate() {
            let g: Vec<Option<ComplexMatrix>> = b
                .coefficients
                .iter()
                .map(|f| f.as_ref().map(|f| s_inv[bi].matmul(f).matmul(&pt.z[bi])))
                .collect();
            for k in 0..m {
                let Some(fk) = &b.coefficients[k] else { continue };
                for l in k..m {
                    let Some(gl) = &g[l] else { continue };
                    let v = fk.re_trace_product(gl);
                    schur[(k, l)] += v;
                    if l != k {
                        schur[(l, k)] += v;
                    }
                }
            }
        }
        for j in 0..nl {
            let w = pt.zl[j] / pt.sl[j];
            let row = &problem.linear.rows[j];
            for k in 0..m {
                if row[k] == 0.0 {
                    continue;
                }
                for l in 0..m {
                    schur[(k, l)] += w * row[k] * row[l];
                }
            }
        }
        let factor = SchurFactor::new(schur);
        let Some(factor) = factor else { break };

        let direction = |sigma_mu: f64, corr: Option<&Direction>| -> Option<Direction> {
            // complementarity targets
            let comp_blocks: Vec<ComplexMatrix> = (0..nb)
                .map(|bi| {
                    let mut t = s_inv[bi].scale(sigma_mu);
                    t -= &s_inv[bi].matmul(&rb[bi]).matmul(&pt.z[bi]);
                    if let Some(c) = corr {
                        t -= &s_inv[bi].matmul(&c.ds[bi]).matmul(&c.dz[bi]);
                    }
                    t
                })
                .collect();
            let comp_lin: Vec<f64> = (0..nl)
                .map(|j| {
                    let mut t = sigma_mu / pt.sl[j] - pt.zl[j] * rl[j] / pt.sl[j];
                    if let Some(c) = corr {
                        t -= c.dsl[j] * c.dzl[j] / pt.sl[j];
                    }
                    t
                })
                .collect();
            let mut rhs = DVector::<f64>::zeros(m);
            for k in 0..m {
                let mut v = -problem.objective[k];
                for (bi, b) in problem.blocks.iter().enumerate() {
                    if let Some(f) = &b.coefficients[k] {
                        v += f.re_trace_product(&comp_blocks[bi]);
                    }
                }
                for j in 0..nl {
                    v += problem.linear.rows[j][k] * comp_lin[j];
                }
                rhs[k] = v;
            }
            let dy = factor.solve(&rhs)?;
            let dy: Vec<f64> = dy.iter().copied().collect();
            let mut ds = Vec::with_capacity(nb);
            let mut dz = Vec::with_capacity(nb);
            for (bi, b) in problem.blocks.iter().enumerate() {
                let lin = b.apply_linear(&dy);
                let mut dzb = &comp_blocks[bi] - &pt.z[bi];
                dzb -= &s_inv[bi].matmul(&lin).matmul(&pt.z[bi]);
                let dsb = &lin + &rb[bi];
                ds.push(dsb);
                dz.push(dzb.hermitian_part());
            }
            let mut dsl = Vec::with_capacity(nl);
            let mut dzl = Vec::with_capacity(nl);
            for j in 0..nl {
                let d = dot(&problem.linear.rows[j], &dy) + rl[j];
                dzl.push(comp_lin[j] + pt.zl[j] * rl[j] / pt.sl[j] - pt.zl[j] - pt.zl[j] / pt.sl[j] * d);
                dsl.push(d);
            }
            Some(Direction { dy, ds, dz, dsl, dzl })
        };

        let step_lengths = |d: &Direction| -> (f64, f64) {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for bi in 0..nb {
                ap = ap.min(max_step(&chol_inv[bi], &d.ds[bi]));
                ad = ad.min(max_step(&z_chol_inv[bi], &d.dz[bi]));
            }
            for j in 0..nl {
                if d.dsl[j] < 0.0 {
                    ap = ap.min(-pt.sl[j] / d.dsl[j]);
                }
                if d.dzl[j] < 0.0 {
                    ad = ad.min(-pt.zl[j] / d.dzl[j]);
                }
            }
            (ap, ad)
        };

        // predictor
        let Some(aff) = direction(0.0, None) else { break };
        let (ap, ad) = step_lengths(&aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut comp_aff = 0.0;
        for bi in 0..nb {
            let s_new = &pt.s[bi] + &aff.ds[bi].scale(ap);
            let z_new = &pt.z[bi] + &aff.dz[bi].scale(ad);
            comp_aff += s_new.re_trace_product(&z_new);
        }
        for j in 0..nl {
            comp_aff += (pt.sl[j] + ap * aff.dsl[j]) * (pt.zl[j] + ad * aff.dzl[j]);
        }
        let mu_aff = comp_aff.max(0.0) / barrier_dim.max(1) as f64;
        let sigma = if mu > 0.0 { (mu_aff / mu).powi(3).clamp(0.0, 1.0) } else { 0.0 };

        // corrector
        let Some(dir) = direction(sigma * mu, Some(&aff)) else { break };
        let (ap, ad) = step_lengths(&dir);
        let ap = (settings.step_fraction * ap).min(1.0);
        let ad = (settings.step_fraction * ad).min(1.0);

        for k in 0..m {
            pt.y[k] += ap * dir.dy[k];
        }
        for bi in 0..nb {
            pt.s[bi] = (&pt.s[bi] + &dir.ds[bi].scale(ap)).hermitian_part();
            pt.z[bi] = (&pt.z[bi] + &dir.dz[bi].scale(ad)).hermitian_part();
        }
        for j in 0..nl {
            pt.sl[j] += ap * dir.dsl[j];
            pt.zl[j] += ad * dir.dzl[j];
        }
        if !pt.y.iter().all(|v| v.is_finite()) {
            break;
        }
    }

    let (_, mut sol) = best.expect("at least one iterate");
    sol.converged = converged;
    if converged {
        // the final iterate is the best one
        sol.iterations = iterations;
    }
    sol
}

/// Largest `α` with `S + α ΔS ⪰ 0`, given `L⁻¹` for `S = L L†`.
fn max_step(l_inv: &ComplexMatrix, ds: &ComplexMatrix) -> f64 {
    let t = l_inv.matmul(ds).matmul(&l_inv.adjoint()).hermitian_part();
    let lmin = eigvalsh(&t)[0];
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

enum SchurFactor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if m.nrows() == 0 {
            return None;
        }
        match m.clone().cholesky() {
            Some(c) => Some(SchurFactor::Cholesky(c)),
            None => {
                let lu = m.lu();
                lu.is_invertible().then_some(SchurFactor::Lu(lu))
            }
        }
    }

    fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        let x = match self {
            SchurFactor::Cholesky(c) => c.solve(b),
            SchurFactor::Lu(lu) => lu.solve(b)?,
        };
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

/// Real coordinates of a Hermitian `d × d` matrix: `d` diagonal entries, then
/// `(E_ij + E_ji)` and `i(E_ij − E_ji)` for `i < j`.
pub fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut e = ComplexMatrix::zeros(d, d);
        e[(i, i)] = crate::linalg::matrix::ONE;
        out.push(e);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut re = ComplexMatrix::zeros(d, d);
            re[(i, j)] = crate::linalg::matrix::ONE;
            re[(j, i)] = crate::linalg::matrix::ONE;
            out.push(re);
            let mut im = ComplexMatrix::zeros(d, d);
            im[(i, j)] = crate::linalg::matrix::I;
            im[(j, i)] = -crate::linalg::matrix::I;
            out.push(im);
        }
    }
    out
}

/// Inverse of [`hermitian_basis`]: `Y = Σ y_k B_k`.
pub fn from_hermitian_coordinates(d: usize, y: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for (b, yk) in hermitian_basis(d).iter().zip(y) {
        m.add_scaled(*yk, b);
    }
    m
}
