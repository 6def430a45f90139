//! Coherence task: Fourier-then-shift unitaries `U_i = X^i H_d` mapping the
//! maximally coherent state onto the computational basis.

use crate::discrimination::{
    optimal_povm, success_probability, Ensemble, Instrument, MeasurementClass, MeasurementClassKind, Povm, Subchannel,
};
use crate::error::{Error, Result};
use crate::free_sets::{basis_vector, make_free_set, FreeSetSpec};
use crate::linalg::hermitian::{QuantumState, UnitaryOperator};
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::linalg::unitaries::{fourier_matrix, shift_matrix};
use crate::robustness::generalized_robustness_with;

use super::named::maximally_coherent_ket;
use super::{ratio_tolerance, AdvantageCertificate, Check, Construction, SynthesisOptions};

/// `U_0 = H_d = (1/√d) Σ ζ^{kj}|k⟩⟨j|` and `U_i = X^i U_0`.
pub fn prop5_unitaries(d: usize) -> Result<Vec<UnitaryOperator>> {
    let h = fourier_matrix(d)?;
    let x = UnitaryOperator::new(shift_matrix(d))?;
    let mut out = vec![h];
    for i in 1..d {
        out.push(x.compose(&out[i - 1]));
    }
    Ok(out)
}

/// `max_{i,j,l} | |⟨j|U_i|l⟩|² − 1/d |`
pub fn unbiasedness_residual(unitaries: &[UnitaryOperator]) -> f64 {
    let mut worst: f64 = 0.0;
    for u in unitaries {
        let d = u.dim();
        for j in 0..d {
            for l in 0..d {
                worst = worst.max((u.as_matrix()[(j, l)].norm_sqr() - 1.0 / d as f64).abs());
            }
        }
    }
    worst
}

/// Diagonal unitary removing the phases of a pure state's amplitudes.
fn dephasing_unitary(amplitudes: &[C64]) -> ComplexMatrix {
    let d = amplitudes.len();
    let mut u = ComplexMatrix::zeros(d, d);
    for (j, c) in amplitudes.iter().enumerate() {
        u[(j, j)] = if c.norm() > 0.0 { (c / c.norm()).conj() } else { C64::new(1.0, 0.0) };
    }
    u
}

pub fn prop5_task(rho: &QuantumState, channel: Option<&Instrument>) -> Result<AdvantageCertificate> {
    prop5_task_with(rho, channel, &SynthesisOptions::default())
}

/// Pure inputs default to the phase-removing unitary channel; mixed inputs
/// need a coherence-nongenerating channel supplied by the caller.
pub fn prop5_task_with(rho: &QuantumState, channel: Option<&Instrument>, opts: &SynthesisOptions) -> Result<AdvantageCertificate> {
    let d = rho.dim();
    let f = make_free_set(&FreeSetSpec::Incoherent { dim: d })?;
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let pure = rho.pure_vector(1e-10);
    let lambda = match (channel, &pure) {
        (Some(c), _) => {
            if c.len() != 1 || c.dim_in() != d || c.dim_out() != d {
                return Err(Error::InvalidChannel(format!("expected one {d}×{d} trace-preserving channel")));
            }
            let mut worst: f64 = 0.0;
            for j in 0..d {
                let out = c.apply_total(&ComplexMatrix::projector(&basis_vector(d, j)));
                for r in 0..d {
                    for s in 0..d {
                        if r != s {
                            worst = worst.max(out[(r, s)].norm());
                        }
                    }
                }
            }
            if worst > 1e-9 {
                return Err(Error::InvalidChannel(format!("channel creates coherence {worst:e} from an incoherent state")));
            }
            checks.push(Check::within("channel_coherence_nongenerating", worst, 1e-9));
            notes.push("user-supplied channel; ratio is the achieved value".into());
            c.clone()
        }
        (None, Some(v)) => Instrument::channel(vec![dephasing_unitary(v)], "dephase_phases")?,
        (None, None) => return Err(Error::ChannelRequired),
    };
    checks.push(Check::within("channel_cptp", lambda.completeness_residual(), 1e-9));
    let rob = generalized_robustness_with(rho, &f, &opts.solver)?;

    let unitaries = prop5_unitaries(d)?;
    let unbiased = unbiasedness_residual(&unitaries);
    checks.push(Check::within("unbiased_unitaries", unbiased, 1e-12));
    let w = ComplexMatrix::projector(&maximally_coherent_ket(d));
    let povm_residual = unitaries
        .iter()
        .enumerate()
        .map(|(i, u)| u.conjugate(&w).max_abs_diff(&ComplexMatrix::projector(&basis_vector(d, i))))
        .fold(0.0, f64::max);
    checks.push(Check::within("povm_from_maximally_coherent", povm_residual, 1e-12));

    let base = Subchannel::new(lambda.total_kraus(), "lambda")?;
    let weight = 1.0 / d as f64;
    let subchannels = unitaries
        .iter()
        .enumerate()
        .map(|(i, u)| super::conjugated_subchannel(&base, u.as_matrix(), weight, format!("fourier_shift_{i}")))
        .collect::<Result<Vec<_>>>()?;
    let task = Instrument::new(subchannels)?;
    let povm = Povm::trusted((0..d).map(|i| ComplexMatrix::projector(&basis_vector(d, i))).collect(), MeasurementClassKind::Free);
    checks.push(Check::within("task_cptp", task.completeness_residual(), 1e-9));

    // free inputs stay incoherent under Λ; the best free measurement on each
    // shifted incoherent vertex stays at 1/d
    let mut free_best: f64 = 0.0;
    let class = MeasurementClass::Free(f.clone());
    for l in 0..d {
        let states = unitaries
            .iter()
            .map(|u| QuantumState::from_trusted(&u.conjugate(&ComplexMatrix::projector(&basis_vector(d, l))), true))
            .collect();
        let ens = Ensemble::new(vec![weight; d], states)?;
        free_best = free_best.max(optimal_povm(&ens, &class)?.p_opt);
    }
    checks.push(Check::within("free_denominator", (free_best - weight).max(0.0), 1e-7));

    let p_resource = success_probability(&task, &povm, rho)?;
    let p_free_best = weight;
    let ratio = p_resource / p_free_best;
    match (&pure, channel) {
        (Some(v), None) => {
            let l1: f64 = v.iter().map(|c| c.norm()).sum();
            checks.push(Check::within("ratio_closed_form", (ratio - l1 * l1).abs(), 1e-9));
            checks.push(Check::within("ratio_matches_robustness", (ratio - 1.0 - rob.value).abs(), ratio_tolerance(&rob)));
        }
        _ => {
            checks.push(Check::within("ratio_at_most_robustness", (ratio - 1.0 - rob.value).max(0.0), ratio_tolerance(&rob)));
        }
    }
    Ok(AdvantageCertificate {
        construction: Construction::Prop5,
        task,
        povm,
        p_resource,
        p_free_best,
        ratio,
        robustness: rob,
        checks,
        notes,
    })
}
