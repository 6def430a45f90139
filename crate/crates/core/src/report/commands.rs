//! The five CLI commands as library functions returning a certificate document.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::discrimination::{effective_observable, Instrument, Povm};
use crate::error::{Error, Result};
use crate::free_sets::{FreeSet, FreeSetKind};
use crate::linalg::hermitian::QuantumState;
use crate::robustness::{robustness_certificate, SolverOptions};
use crate::synthesis::{
    prop5_task_with, prop6_task_with, sm_demo_with, thm1_channels_with, thm2_task_with, thm4_task_with, u_nc, AdvantageCertificate,
    Construction, SynthesisOptions,
};

use super::certificate::{advantage_json, instrument_json, robustness_json, witness_json};
use super::json::{matrix, Object, SCHEMA_VERSION};
use super::spec::{FreeSetDescriptor, StateSpec};

/// Overrides and run settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gap_tolerance: Option<f64>,
    pub psd_slack: Option<f64>,
    pub bisection_width: Option<f64>,
    pub max_iterations: Option<usize>,
    pub seed: u64,
    pub output_path: Option<String>,
    /// Adds a `timestamp` field; everything else stays deterministic.
    pub timestamp: bool,
    /// Rounds for `simulate`.
    pub rounds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gap_tolerance: None,
            psd_slack: None,
            bisection_width: None,
            max_iterations: None,
            seed: 0,
            output_path: None,
            timestamp: false,
            rounds: 10_000,
        }
    }
}

impl RunConfig {
    pub fn solver_options(&self) -> Result<SolverOptions> {
        let mut o = SolverOptions::default();
        for (name, v, slot) in [
            ("tol", self.gap_tolerance, &mut o.gap_tolerance),
            ("psd slack", self.psd_slack, &mut o.feasibility_slack),
            ("bisection width", self.bisection_width, &mut o.bisection_width),
        ] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::invalid(format!("{name} must be a positive number, got {x}")));
                }
                *slot = x;
            }
        }
        if let Some(n) = self.max_iterations {
            if n == 0 {
                return Err(Error::invalid("max-iter must be positive"));
            }
            o.sdp.max_iterations = n;
        }
        Ok(o)
    }

    fn synthesis_options(&self) -> Result<SynthesisOptions> {
        Ok(SynthesisOptions { solver: self.solver_options()?, seed: self.seed })
    }
}

/// A certificate document plus a short human-readable summary.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub document: Value,
    pub summary: String,
    /// 0 on success, 2 when the solver stopped short of its tolerance.
    pub exit_code: i32,
}

/// 2 for non-convergence, 1 for everything else.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } => 2,
        _ => 1,
    }
}

fn envelope(command: &str, cfg: &RunConfig) -> Object {
    let mut o = Object::new().with("schema_version", SCHEMA_VERSION).with("command", command).with("seed", cfg.seed);
    if cfg.timestamp {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        o = o.with("timestamp", secs);
    }
    o
}

fn inputs(o: Object, state: &StateSpec, fset: Option<&FreeSetDescriptor>) -> Object {
    let o = o.with("state", serde_json::to_value(state).expect("spec serializes"));
    match fset {
        Some(f) => o.with("free_set", serde_json::to_value(f).expect("spec serializes")),
        None => o,
    }
}

pub fn cmd_robustness(spec: &StateSpec, rho: &QuantumState, fdesc: &FreeSetDescriptor, f: &FreeSet, cfg: &RunConfig) -> Result<CommandOutput> {
    let opts = cfg.solver_options()?;
    let cert = robustness_certificate(rho, f, &opts)?;
    let summary = format!(
        "robustness {:.9} (dual {:.9}, gap {:.2e}, {} iterations){}",
        cert.value,
        cert.dual_value,
        cert.gap,
        cert.iterations,
        if cert.converged { "" } else { " NOT CONVERGED" }
    );
    let exit_code = if cert.converged { 0 } else { 2 };
    let mut doc = inputs(envelope("robustness", cfg), spec, Some(fdesc));
    if let Value::Object(map) = robustness_json(&cert) {
        for (k, v) in map {
            doc = doc.with(&k, v);
        }
    }
    Ok(CommandOutput { document: doc.build(), summary, exit_code })
}

pub fn cmd_witness(spec: &StateSpec, rho: &QuantumState, fdesc: &FreeSetDescriptor, f: &FreeSet, cfg: &RunConfig) -> Result<CommandOutput> {
    let opts = cfg.solver_options()?;
    let cert = robustness_certificate(rho, f, &opts)?;
    let value = cert.witness.value_on(rho);
    let summary = format!("witness value Tr(rho X) = {value:.9}, support value {:.9}", cert.witness.support_value);
    let doc = inputs(envelope("witness", cfg), spec, Some(fdesc))
        .with("witness", witness_json(&cert))
        .real("value_on_state", value)
        .with("certifies_resource", value > 1.0 + opts.gap_tolerance)
        .real("robustness", cert.value)
        .real("dual_value", cert.dual_value)
        .real("gap", cert.gap)
        .with("converged", cert.converged)
        .build();
    Ok(CommandOutput { document: doc, summary, exit_code: if cert.converged { 0 } else { 2 } })
}

fn require_kind(f: &FreeSet, ok: bool, construction: Construction, wanted: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("construction {} needs free set {wanted}, got {}", construction.name(), f.kind().name())))
    }
}

/// Runs a construction; the extra object holds construction-specific fields.
fn synthesize(construction: Construction, rho: &QuantumState, f: &FreeSet, opts: &SynthesisOptions) -> Result<(AdvantageCertificate, Object)> {
    match construction {
        Construction::Thm1 => {
            let r = thm1_channels_with(rho, f, opts)?;
            let extra = Object::new()
                .with("lambda0", instrument_json(&r.lambda0))
                .with("lambda1", instrument_json(&r.lambda1))
                .with("x", matrix(&r.x))
                .real("margin", r.margin)
                .real("margin_bound", r.margin_bound);
            Ok((r.certificate, extra))
        }
        Construction::Thm2 => Ok((thm2_task_with(rho, f, opts)?, Object::new())),
        Construction::Thm4 => {
            require_kind(f, f.kind() == FreeSetKind::SeparablePpt { dim_a: 2, dim_b: 2 }, construction, "separable_ppt:2x2")?;
            Ok((thm4_task_with(rho, None, opts)?, Object::new()))
        }
        Construction::Prop5 => {
            require_kind(f, f.kind() == FreeSetKind::Incoherent(rho.dim()), construction, "incoherent of the state's dimension")?;
            Ok((prop5_task_with(rho, None, opts)?, Object::new()))
        }
        Construction::Prop6 => {
            require_kind(f, f.kind() == FreeSetKind::StabilizerQubit, construction, "stabilizer_qubit")?;
            Ok((prop6_task_with(rho, opts)?, Object::new()))
        }
        Construction::SmDemo => Ok((sm_demo_with(opts)?, Object::new())),
    }
}

pub fn cmd_synthesize(
    construction: Construction,
    spec: &StateSpec,
    rho: &QuantumState,
    fdesc: &FreeSetDescriptor,
    f: &FreeSet,
    cfg: &RunConfig,
) -> Result<CommandOutput> {
    let opts = cfg.synthesis_options()?;
    let (cert, extra) = synthesize(construction, rho, f, &opts)?;
    let summary = format!(
        "{}: p_resource {:.9}, p_free_best {:.9}, ratio {:.9}, 1+R {:.9}, checks {}",
        construction.name(),
        cert.p_resource,
        cert.p_free_best,
        cert.ratio,
        1.0 + cert.robustness.value,
        if cert.all_passed() { "passed" } else { "FAILED" }
    );
    let mut doc = inputs(envelope("synthesize", cfg), spec, Some(fdesc)).with("certificate", advantage_json(&cert));
    if let Value::Object(map) = extra.build() {
        for (k, v) in map {
            doc = doc.with(&k, v);
        }
    }
    Ok(CommandOutput { document: doc.build(), summary, exit_code: 0 })
}

/// Seeded sampling of `rounds` discrimination rounds: outcome `i` of the
/// instrument together with the guess `j` from the POVM occurs with
/// probability `Tr(M_j Ψ_i(ρ))`.
pub fn simulate_rounds(task: &Instrument, povm: &Povm, rho: &QuantumState, rounds: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
    let n = task.len();
    if povm.len() != n {
        return Err(Error::invalid("POVM does not match the task"));
    }
    let mut weights = Vec::with_capacity(n * n);
    for s in task.subchannels() {
        let out = s.apply(rho.matrix());
        for m in povm.elements() {
            weights.push(m.re_trace_product(&out).max(0.0));
        }
    }
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::invalid(format!("outcome distribution: {e}")))?;
    Ok((0..rounds).filter(|_| {
        let k = dist.sample(rng);
        k / n == k % n
    }).count())
}

pub fn cmd_simulate(
    construction: Construction,
    spec: &StateSpec,
    rho: &QuantumState,
    fdesc: &FreeSetDescriptor,
    f: &FreeSet,
    cfg: &RunConfig,
) -> Result<CommandOutput> {
    if cfg.rounds == 0 {
        return Err(Error::invalid("rounds must be positive"));
    }
    let opts = cfg.synthesis_options()?;
    let (cert, _) = synthesize(construction, rho, f, &opts)?;
    let e = effective_observable(&cert.task, &cert.povm)?;
    // tasks that fix their own free set are compared against that set
    let free = match construction {
        Construction::Thm4 | Construction::Prop5 | Construction::Prop6 | Construction::SmDemo => free_set_for(construction, rho)?,
        _ => f.clone(),
    };
    let (_, sigma) = free.support_point(e.as_matrix())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let resource_wins = simulate_rounds(&cert.task, &cert.povm, rho, cfg.rounds, &mut rng)?;
    let free_wins = simulate_rounds(&cert.task, &cert.povm, &sigma, cfg.rounds, &mut rng)?;
    let rate_r = resource_wins as f64 / cfg.rounds as f64;
    let rate_f = free_wins as f64 / cfg.rounds as f64;
    let summary = format!(
        "{} rounds: resource {rate_r:.4} (exact {:.6}), best free {rate_f:.4} (exact {:.6})",
        cfg.rounds, cert.p_resource, cert.p_free_best
    );
    let doc = inputs(envelope("simulate", cfg), spec, Some(fdesc))
        .with("construction", construction.name())
        .with("rounds", cfg.rounds)
        .with("resource_successes", resource_wins)
        .with("free_successes", free_wins)
        .real("resource_rate", rate_r)
        .real("free_rate", rate_f)
        .real("p_resource", cert.p_resource)
        .real("p_free_best", cert.p_free_best)
        .real("ratio", cert.ratio)
        .with("free_state", matrix(sigma.matrix()))
        .build();
    Ok(CommandOutput { document: doc, summary, exit_code: 0 })
}

fn free_set_for(construction: Construction, rho: &QuantumState) -> Result<FreeSet> {
    use crate::free_sets::{make_free_set, FreeSetSpec};
    make_free_set(&match construction {
        Construction::Thm4 => FreeSetSpec::SeparablePpt { dim_a: 2, dim_b: 2 },
        Construction::Prop5 => FreeSetSpec::Incoherent { dim: rho.dim() },
        _ => FreeSetSpec::StabilizerQubit,
    })
}

pub fn cmd_demo(cfg: &RunConfig) -> Result<CommandOutput> {
    let opts = cfg.synthesis_options()?;
    let cert = sm_demo_with(&opts)?;
    let residual = cert.check("u_nc_equivalence").map(|c| c.residual).unwrap_or(f64::NAN);
    let summary = format!(
        "T-state phase-flip demo: p_resource {:.9}, p_free_best {:.9}, ratio {:.9}, U_NC residual {residual:.1e}",
        cert.p_resource, cert.p_free_best, cert.ratio
    );
    let doc = envelope("demo", cfg)
        .with("certificate", advantage_json(&cert))
        .with("u_nc", matrix(&u_nc()))
        .real("u_nc_equivalence_residual", residual)
        .build();
    Ok(CommandOutput { document: doc, summary, exit_code: 0 })
}
