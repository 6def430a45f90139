//! Generalized robustness `R_F(ρ) = min { s ≥ 0 : (ρ + sτ)/(1+s) ∈ F }` and
//! its dual witness `max { Tr(ρX) − 1 : X ⪰ 0, Tr(σX) ≤ 1 ∀σ ∈ F }`.
//!
//! The primal value comes from bisection on `s` over an exact feasibility
//! test; the dual value from a witness optimization. Both subproblems are
//! semidefinite programs handled by [`crate::sdp`].

mod brute_force;

pub use brute_force::brute_force_robustness_qubit;

use crate::error::{Error, Result};
use crate::free_sets::FreeSet;
use crate::linalg::eigen::eig_matrix;
use crate::linalg::hermitian::{HermitianOperator, QuantumState};
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::linalg::ops::partial_transpose_matrix;
use crate::sdp::{self, hermitian_basis, LmiBlock, SdpProblem, SdpSettings, SdpSolution};

/// Solver knobs a caller may override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest accepted `|primal − dual|`.
    pub gap_tolerance: f64,
    /// `s` counts as feasible when the best eigenvalue margin is at least `−feasibility_slack`.
    pub feasibility_slack: f64,
    pub bisection_width: f64,
    /// Noise state is reported only when clipping removed less mass than this.
    pub tau_clip_mass: f64,
    pub sdp: SdpSettings,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_tolerance: 1e-5,
            feasibility_slack: 1e-9,
            bisection_width: 1e-8,
            tau_clip_mass: 1e-6,
            sdp: SdpSettings::default(),
        }
    }
}

/// PSD operator with support value at most one on the free set.
#[derive(Debug, Clone)]
pub struct WitnessOperator {
    pub x: HermitianOperator,
    /// Largest eigenvalue `c`; equals the prefactor of `X = c|w⟩⟨w|` when `X` has rank one.
    pub scale: f64,
    /// Eigenvector of the largest eigenvalue.
    pub direction: Vec<C64>,
    pub support_value: f64,
}

impl WitnessOperator {
    pub(crate) fn from_matrix(x: ComplexMatrix, support_value: f64) -> Result<Self> {
        let e = eig_matrix(&x)?;
        Ok(WitnessOperator {
            x: HermitianOperator::hermitize(&x),
            scale: e.max(),
            direction: e.eigenvectors.last().cloned().unwrap_or_default(),
            support_value,
        })
    }

    pub fn value_on(&self, rho: &QuantumState) -> f64 {
        rho.expectation(self.x.as_matrix())
    }

    /// Rank one within `tol` relative to the scale.
    pub fn is_rank_one(&self, tol: f64) -> bool {
        let e = crate::linalg::eigen::eigvalsh(self.x.as_matrix());
        let n = e.len();
        n < 2 || e[n - 2].abs() <= tol * self.scale.abs().max(1.0)
    }
}

/// One probe of the bisection on `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionStep {
    pub s: f64,
    pub feasible: bool,
    /// Best `t` with `(1+s)σ − ρ ⪰ tI` for some free `σ`.
    pub margin: f64,
    /// Lower bound on `R` from the step's dual certificate.
    pub dual_bound: f64,
}

#[derive(Debug, Clone)]
pub struct RobustnessCertificate {
    pub value: f64,
    pub optimal_sigma: QuantumState,
    pub optimal_tau: Option<QuantumState>,
    pub witness: WitnessOperator,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub tolerance_used: f64,
    pub converged: bool,
    pub bisection: Vec<BisectionStep>,
}

impl RobustnessCertificate {
    /// Largest amount by which any dual bound seen exceeds any primal bound seen.
    /// A step accepted with margin `−ε` certifies `R ≤ s + dε` after mixing in
    /// the maximally mixed state, and that is the primal bound used here.
    pub fn weak_duality_violation(&self) -> f64 {
        let d = self.optimal_sigma.dim() as f64;
        let upper = self
            .bisection
            .iter()
            .filter(|b| b.feasible)
            .map(|b| b.s + d * (-b.margin).max(0.0))
            .fold(f64::INFINITY, f64::min);
        let lower = self.bisection.iter().map(|b| b.dual_bound).chain([self.dual_value]).fold(f64::NEG_INFINITY, f64::max);
        (lower - upper).max(0.0)
    }
}

/// Result of the feasibility test at fixed `s`.
#[derive(Debug, Clone)]
pub struct Feasibility {
    pub feasible: bool,
    pub margin: f64,
    /// Separating operator `W`: `Tr(σW) ≥ 0` on `F`; when infeasible,
    /// `Tr(ρW) < s·(…)` and for `s = 0` simply `Tr(ρW) < 0`.
    pub witness_direction: HermitianOperator,
    /// Free state attaining the margin.
    pub sigma: QuantumState,
    pub dual_bound: f64,
    pub iterations: usize,
}

fn check_dims(rho: &QuantumState, f: &FreeSet) -> Result<()> {
    if rho.dim() != f.dim() {
        return Err(Error::invalid(format!("state dimension {} does not match free set dimension {}", rho.dim(), f.dim())));
    }
    Ok(())
}

pub fn feasibility_at(s: f64, rho: &QuantumState, f: &FreeSet) -> Result<Feasibility> {
    feasibility_at_with(s, rho, f, &SolverOptions::default())
}

/// Maximizes `t` subject to `Y − ρ − tI ⪰ 0` with `Y` in the cone of
/// `F` and `Tr Y ≤ 1 + s`. Missing trace is filled with `I/d ∈ F`.
pub fn feasibility_at_with(s: f64, rho: &QuantumState, f: &FreeSet, opts: &SolverOptions) -> Result<Feasibility> {
    check_dims(rho, f)?;
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::invalid(format!("robustness level must be finite and nonnegative, got {s}")));
    }
    let d = f.dim();
    let id = ComplexMatrix::identity(d);
    match f.ppt_dims() {
        None => {
            let verts = f.vertices();
            let n = verts.len();
            let mut objective = vec![0.0; n + 1];
            objective[n] = -1.0;
            let mut p = SdpProblem::new(objective);
            let mut block = LmiBlock::new(rho.matrix().clone(), n + 1);
            for (k, v) in verts.iter().enumerate() {
                block.set(k, v.matrix().clone());
            }
            block.set(n, -&id);
            p.blocks.push(block);
            for k in 0..n {
                let mut row = vec![0.0; n + 1];
                row[k] = 1.0;
                p.linear.push(row, 0.0);
            }
            let mut row = vec![-1.0; n + 1];
            row[n] = 0.0;
            p.linear.push(row, -(1.0 + s));
            let sol = sdp::solve(&p, &opts.sdp);
            let margin = sol.y[n];
            let mut y_sum = 0.0;
            let mut cone = ComplexMatrix::zeros(d, d);
            for (k, v) in verts.iter().enumerate() {
                let yk = sol.y[k].max(0.0);
                y_sum += yk;
                cone.add_scaled(yk, v.matrix());
            }
            let z0 = &sol.dual_blocks[0];
            let c = verts.iter().map(|v| v.matrix().re_trace_product(z0)).fold(f64::NEG_INFINITY, f64::max);
            let mut w = id.scale(c);
            w -= z0;
            let dual_bound = rho.expectation(z0) / c - 1.0;
            finish(s, d, cone, y_sum, margin, w, dual_bound, &sol, opts)
        }
        Some((da, db)) => {
            let basis = hermitian_basis(d);
            let m = basis.len();
            let mut objective = vec![0.0; m + 1];
            objective[m] = -1.0;
            let mut p = SdpProblem::new(objective);
            let mut shifted = LmiBlock::new(rho.matrix().clone(), m + 1);
            let mut plain = LmiBlock::new(ComplexMatrix::zeros(d, d), m + 1);
            let mut transposed = LmiBlock::new(ComplexMatrix::zeros(d, d), m + 1);
            for (k, b) in basis.iter().enumerate() {
                shifted.set(k, b.clone());
                plain.set(k, b.clone());
                transposed.set(k, partial_transpose_matrix(b, da, db)?);
            }
            shifted.set(m, -&id);
            p.blocks.extend([shifted, plain, transposed]);
            let mut row: Vec<f64> = basis.iter().map(|b| -b.trace().re).collect();
            row.push(0.0);
            p.linear.push(row, -(1.0 + s));
            let sol = sdp::solve(&p, &opts.sdp);
            let margin = sol.y[m];
            let y = sdp::from_hermitian_coordinates(d, &sol.y[..m]);
            let y_sum = y.trace().re;
            let z1 = &sol.dual_blocks[1];
            let z2t = partial_transpose_matrix(&sol.dual_blocks[2], da, db)?;
            let w = z1 + &z2t;
            // Z0 = uI − Z1 − Z2^Γ + E, so Tr(σ Z0) ≤ u + ‖E‖ on PPT states
            let u = sol.dual_linear[0];
            let mut e = sol.dual_blocks[0].clone();
            e += &w;
            e -= &id.scale(u);
            let bound = u + e.frobenius_norm();
            let dual_bound = rho.expectation(&sol.dual_blocks[0]) / bound - 1.0;
            finish(s, d, y, y_sum, margin, w, dual_bound, &sol, opts)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    s: f64,
    d: usize,
    cone: ComplexMatrix,
    y_sum: f64,
    margin: f64,
    w: ComplexMatrix,
    dual_bound: f64,
    sol: &SdpSolution,
    opts: &SolverOptions,
) -> Result<Feasibility> {
    let mut sigma = cone;
    let fill = (1.0 + s - y_sum).max(0.0);
    sigma += &ComplexMatrix::identity(d).scale(fill / d as f64);
    let (sigma, _) = QuantumState::repair(&sigma)?;
    Ok(Feasibility {
        feasible: margin >= -opts.feasibility_slack,
        margin,
        witness_direction: HermitianOperator::hermitize(&w),
        sigma,
        dual_bound: if dual_bound.is_finite() { dual_bound } else { f64::NEG_INFINITY },
        iterations: sol.iterations,
    })
}

/// Optimal witness of the dual problem, rescaled to be exactly feasible.
pub fn dual_witness(rho: &QuantumState, f: &FreeSet) -> Result<WitnessOperator> {
    Ok(dual_witness_with(rho, f, &SolverOptions::default())?.0)
}

/// Witness plus the solver's own primal bound `Σy − 1 ≥ R` and iteration count.
pub fn dual_witness_with(rho: &QuantumState, f: &FreeSet, opts: &SolverOptions) -> Result<(WitnessOperator, f64, usize)> {
    check_dims(rho, f)?;
    let d = f.dim();
    let (z, upper, iterations) = match f.ppt_dims() {
        None => {
            let verts = f.vertices();
            let n = verts.len();
            let mut p = SdpProblem::new(vec![1.0; n]);
            let mut block = LmiBlock::new(rho.matrix().clone(), n);
            for (k, v) in verts.iter().enumerate() {
                block.set(k, v.matrix().clone());
            }
            p.blocks.push(block);
            for k in 0..n {
                let mut row = vec![0.0; n];
                row[k] = 1.0;
                p.linear.push(row, 0.0);
            }
            let sol = sdp::solve(&p, &opts.sdp);
            (sol.dual_blocks[0].clone(), sol.primal_objective - 1.0, sol.iterations)
        }
        Some((da, db)) => {
            let basis = hermitian_basis(d);
            let m = basis.len();
            let objective: Vec<f64> = basis.iter().map(|b| b.trace().re).collect();
            let mut p = SdpProblem::new(objective);
            let mut shifted = LmiBlock::new(rho.matrix().clone(), m);
            let mut plain = LmiBlock::new(ComplexMatrix::zeros(d, d), m);
            let mut transposed = LmiBlock::new(ComplexMatrix::zeros(d, d), m);
            for (k, b) in basis.iter().enumerate() {
                shifted.set(k, b.clone());
                plain.set(k, b.clone());
                transposed.set(k, partial_transpose_matrix(b, da, db)?);
            }
            p.blocks.extend([shifted, plain, transposed]);
            let sol = sdp::solve(&p, &opts.sdp);
            (sol.dual_blocks[0].clone(), sol.primal_objective - 1.0, sol.iterations)
        }
    };
    let e = eig_matrix(&z)?;
    let clipped = e.map(|x| x.max(0.0));
    let sv = f.support_point(&clipped)?.0;
    let x = if sv > 0.0 { clipped.scale(1.0 / sv) } else { ComplexMatrix::identity(d) };
    let sv_final = if sv > 0.0 { f.support_point(&x)?.0 } else { 1.0 };
    Ok((WitnessOperator::from_matrix(x, sv_final)?, upper, iterations))
}

/// Generalized robustness with the default options; fails with
/// `NonConvergence` when the certified gap exceeds the tolerance.
pub fn generalized_robustness(rho: &QuantumState, f: &FreeSet) -> Result<RobustnessCertificate> {
    generalized_robustness_with(rho, f, &SolverOptions::default())
}

pub fn generalized_robustness_with(rho: &QuantumState, f: &FreeSet, opts: &SolverOptions) -> Result<RobustnessCertificate> {
    let cert = robustness_certificate(rho, f, opts)?;
    if !cert.converged {
        return Err(Error::NonConvergence { iterations: cert.iterations, best_gap: cert.gap });
    }
    Ok(cert)
}

/// Runs the full computation and returns the certificate even when the gap
/// target was missed (`converged == false`).
pub fn robustness_certificate(rho: &QuantumState, f: &FreeSet, opts: &SolverOptions) -> Result<RobustnessCertificate> {
    check_dims(rho, f)?;
    let mut steps = Vec::new();
    let mut iterations = 0;
    let probe = |s: f64, steps: &mut Vec<BisectionStep>, iterations: &mut usize| -> Result<Feasibility> {
        let r = feasibility_at_with(s, rho, f, opts)?;
        *iterations += r.iterations;
        steps.push(BisectionStep { s, feasible: r.feasible, margin: r.margin, dual_bound: r.dual_bound });
        Ok(r)
    };

    let at_zero = probe(0.0, &mut steps, &mut iterations)?;
    let (primal, sigma_best) = if at_zero.feasible {
        (0.0, at_zero.sigma)
    } else {
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut best = loop {
            let r = probe(hi, &mut steps, &mut iterations)?;
            if r.feasible {
                break r;
            }
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                if r.iterations >= opts.sdp.max_iterations {
                    return Err(Error::NonConvergence { iterations: iterations, best_gap: f64::INFINITY });
                }
                return Err(Error::NoFullRankFreeState);
            }
        };
        while hi - lo > opts.bisection_width {
            let mid = 0.5 * (lo + hi);
            let r = probe(mid, &mut steps, &mut iterations)?;
            if r.feasible {
                hi = mid;
                best = r;
            } else {
                lo = mid;
            }
        }
        (hi, best.sigma)
    };

    let (witness, _, dual_iters) = dual_witness_with(rho, f, opts)?;
    iterations += dual_iters;
    let dual = witness.value_on(rho) - 1.0;
    let gap = (primal - dual).abs();

    let optimal_tau = if primal > 0.0 {
        let mut t = sigma_best.matrix().scale(1.0 + primal);
        t -= rho.matrix();
        let t = t.scale(1.0 / primal);
        match QuantumState::repair(&t) {
            Ok((tau, mass)) if mass < opts.tau_clip_mass => Some(tau),
            _ => None,
        }
    } else {
        None
    };

    Ok(RobustnessCertificate {
        value: primal,
        optimal_sigma: sigma_best,
        optimal_tau,
        witness,
        primal_value: primal,
        dual_value: dual,
        gap,
        iterations,
        tolerance_used: opts.gap_tolerance,
        converged: gap <= opts.gap_tolerance,
        bisection: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_sets::{make_free_set, FreeSetSpec};

    fn ket(v: &[C64]) -> QuantumState {
        QuantumState::from_ket(v).unwrap()
    }

    fn t_state() -> QuantumState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ket(&[C64::new(s, 0.0), C64::from_polar(s, std::f64::consts::FRAC_PI_4)])
    }

    #[test]
    fn reference_values() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ket(&[C64::new(s, 0.0), C64::new(s, 0.0)]);
        let inc = make_free_set(&FreeSetSpec::Incoherent { dim: 2 }).unwrap();
        let c = generalized_robustness(&plus, &inc).unwrap();
        assert!((c.value - 1.0).abs() < 1e-6, "{c:?}");
        let stab = make_free_set(&FreeSetSpec::StabilizerQubit).unwrap();
        let c = generalized_robustness(&t_state(), &stab).unwrap();
        assert!((c.value - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-6, "{}", c.value);
        assert!(c.weak_duality_violation() < 1e-9);
        let bell = ket(&[C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)]);
        let ppt = make_free_set(&FreeSetSpec::SeparablePpt { dim_a: 2, dim_b: 2 }).unwrap();
        let c = generalized_robustness(&bell, &ppt).unwrap();
        assert!((c.value - 1.0).abs() < 1e-6, "{}", c.value);
        let oracle = brute_force_robustness_qubit(&t_state(), &stab, 200).unwrap();
        assert!((oracle - (3.0 - 2.0 * 2f64.sqrt())).abs() < 2e-3, "{oracle}");
    }
}
