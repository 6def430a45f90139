//! Two-qubit entanglement task: local Pauli shifts of a separability-preserving
//! channel's output, measured in the Bell basis.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::discrimination::{
    check_povm_optimality, effective_observable, optimal_povm, success_probability, Ensemble, Instrument, MeasurementClass,
    MeasurementClassKind, Povm, Subchannel,
};
use crate::error::{Error, Result};
use crate::free_sets::{make_free_set, FreeSetSpec};
use crate::linalg::eigen::{eig_matrix, min_eigenvalue};
use crate::linalg::hermitian::QuantumState;
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::ops::{kron, kron_vec, operator_norm, partial_transpose_matrix};
use crate::linalg::unitaries::pauli_family;
use crate::robustness::generalized_robustness_with;
use crate::sampling::random_ket;

use super::named::phi_plus_ket;
use super::{ratio_tolerance, AdvantageCertificate, Check, Construction, SynthesisOptions};

const D: usize = 2;

/// `M_i = (I⊗P_i)|Φ+⟩⟨Φ+|(I⊗P_i)†`, the Bell basis.
pub fn phi_plus_povm() -> Result<Povm> {
    let phi = ComplexMatrix::projector(&phi_plus_ket(D));
    let elements = local_paulis()?.iter().map(|u| u.conjugate(&phi)).collect();
    Povm::new(elements)
}

fn local_paulis() -> Result<Vec<ComplexMatrix>> {
    Ok(pauli_family(D)?.iter().map(|p| kron(&ComplexMatrix::identity(D), p.as_matrix())).collect())
}

/// `η ↦ Tr(ηA)Φ+ + Tr(η(I−A))(I−Φ+)/(d²−1)` with `A = X/d`.
fn isotropic_channel(x: &ComplexMatrix) -> Result<Instrument> {
    let n = D * D;
    let a = eig_matrix(&x.scale(1.0 / D as f64))?;
    let bell: Vec<Vec<_>> = {
        let phi = phi_plus_ket(D);
        local_paulis()?.iter().map(|u| u.apply(&phi)).collect()
    };
    let mut kraus = Vec::new();
    for (ak, ek) in a.eigenvalues.iter().zip(&a.eigenvectors) {
        let ak = ak.clamp(0.0, 1.0);
        kraus.push(ComplexMatrix::outer(&bell[0], ek).scale(ak.sqrt()));
        for b in &bell[1..] {
            kraus.push(ComplexMatrix::outer(b, ek).scale(((1.0 - ak) / (n - 1) as f64).sqrt()));
        }
    }
    Instrument::channel(kraus, "isotropic")
}

/// Worst `λ_min(Λ(v)^{T_B})` over stabilizer products and random pure products.
fn separability_spot_check(channel: &Instrument, rng: &mut ChaCha8Rng) -> Result<f64> {
    let stab = make_free_set(&FreeSetSpec::StabilizerQubit)?;
    let mut worst = f64::INFINITY;
    let mut probe = |m: &ComplexMatrix| -> Result<()> {
        let out = channel.apply_total(m);
        worst = worst.min(min_eigenvalue(&partial_transpose_matrix(&out, D, D)?));
        Ok(())
    };
    for a in stab.vertices() {
        for b in stab.vertices() {
            probe(&kron(a.matrix(), b.matrix()))?;
        }
    }
    for _ in 0..1000 {
        let v = kron_vec(&random_ket(rng, D), &random_ket(rng, D));
        probe(&ComplexMatrix::projector(&v))?;
    }
    Ok(worst)
}

pub fn thm4_task(rho: &QuantumState, channel: Option<&Instrument>) -> Result<AdvantageCertificate> {
    thm4_task_with(rho, channel, &SynthesisOptions::default())
}

/// Requires a two-qubit input. Without a supplied channel the isotropic
/// measure-and-prepare channel built from the optimal PPT witness is used.
pub fn thm4_task_with(rho: &QuantumState, channel: Option<&Instrument>, opts: &SynthesisOptions) -> Result<AdvantageCertificate> {
    if rho.dim() != D * D {
        return Err(Error::UnsupportedDimension(format!("entanglement task needs 2⊗2 input, got dimension {}", rho.dim())));
    }
    let f = make_free_set(&FreeSetSpec::SeparablePpt { dim_a: D, dim_b: D })?;
    let rob = generalized_robustness_with(rho, &f, &opts.solver)?;
    let x = rob.witness.x.as_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let lambda = match channel {
        Some(c) => {
            if c.len() != 1 || c.dim_in() != D * D || c.dim_out() != D * D {
                return Err(Error::InvalidChannel("expected one 4×4 trace-preserving channel".into()));
            }
            let worst = separability_spot_check(c, &mut rng)?;
            if worst < -1e-9 {
                return Err(Error::InvalidChannel(format!("channel output on a product state is not PPT (eigenvalue {worst:e})")));
            }
            checks.push(Check::flag("channel_separability_spot_check", true, worst));
            notes.push("user-supplied channel".into());
            c.clone()
        }
        None => {
            let x_norm = operator_norm(x);
            if x_norm > D as f64 + 1e-9 {
                return Err(Error::InvalidChannel(format!("witness norm {x_norm} exceeds d = {D}")));
            }
            checks.push(Check::within("witness_norm_at_most_d", (x_norm - D as f64).max(0.0), 1e-9));
            isotropic_channel(x)?
        }
    };
    checks.push(Check::within("channel_cptp", lambda.completeness_residual(), 1e-9));

    let phi = ComplexMatrix::projector(&phi_plus_ket(D));
    let numerator = D as f64 * lambda.apply_total(rho.matrix()).re_trace_product(&phi);
    let base = Subchannel::new(lambda.total_kraus(), "lambda")?;
    let paulis = local_paulis()?;
    let weight = 1.0 / (D * D) as f64;
    let subchannels = paulis
        .iter()
        .enumerate()
        .map(|(i, u)| super::conjugated_subchannel(&base, u, weight, format!("pauli_{i}")))
        .collect::<Result<Vec<_>>>()?;
    let task = Instrument::new(subchannels)?;
    let povm = phi_plus_povm()?;
    checks.push(Check::within("povm_completeness", povm.completeness_residual(), 1e-9));
    checks.push(Check::within("task_cptp", task.completeness_residual(), 1e-9));

    let p_resource = success_probability(&task, &povm, rho)?;
    checks.push(Check::within("p_resource_numerator", (D as f64 * p_resource - numerator).abs(), 1e-10));

    // free-side bound: support value of the effective observable over PPT
    let e = effective_observable(&task, &povm)?;
    let sv = f.support_value(&e)?;
    checks.push(Check::within("free_support_bound", (sv - 1.0 / D as f64).max(0.0), 1e-6));

    // reduced problem: ensemble {1/d², P_i|φ⟩} for sampled second factors
    let qubit_paulis = pauli_family(D)?;
    let mut worst_gap: f64 = 0.0;
    let mut worst_residual = f64::INFINITY;
    for _ in 0..200 {
        // product input |φ1⟩|φ2⟩; only the second factor enters the bound
        let _phi1 = random_ket(&mut rng, D);
        let phi2 = random_ket(&mut rng, D);
        let states: Vec<QuantumState> = qubit_paulis
            .iter()
            .map(|p| QuantumState::from_trusted(&ComplexMatrix::projector(&p.apply(&phi2)), true))
            .collect();
        let ens = Ensemble::new(vec![weight; D * D], states.clone())?;
        let best = optimal_povm(&ens, &MeasurementClass::Unconstrained)?;
        worst_gap = worst_gap.max((best.p_opt - 1.0 / D as f64).abs());
        let n_i = Povm::trusted(states.iter().map(|s| s.matrix().scale(1.0 / D as f64)).collect(), MeasurementClassKind::Unconstrained);
        worst_residual = worst_residual.min(check_povm_optimality(&ens, &n_i, 1e-9)?.min_residual);
    }
    checks.push(Check::within("denominator_sampled", worst_gap, 1e-7));
    checks.push(Check::flag("twirl_povm_optimal", worst_residual >= -1e-9, worst_residual));

    let p_free_best = 1.0 / D as f64;
    let ratio = p_resource / p_free_best;
    if channel.is_none() {
        checks.push(Check::within("ratio_matches_robustness", (ratio - 1.0 - rob.value).abs(), ratio_tolerance(&rob)));
    } else {
        checks.push(Check::within("ratio_at_most_robustness", (ratio - 1.0 - rob.value).max(0.0), ratio_tolerance(&rob)));
    }
    Ok(AdvantageCertificate {
        construction: Construction::Thm4,
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::named_state;

    #[test]
    fn bell_ratio_two() {
        let c = thm4_task(&named_state("bell").unwrap(), None).unwrap();
        assert!((c.ratio - 2.0).abs() < 1e-4, "{}", c.ratio);
        assert!(c.all_passed(), "{:?}", c.checks);
    }

    #[test]
    fn product_ratio_one() {
        let zero = named_state("zero").unwrap();
        let plus = named_state("plus").unwrap();
        let rho = QuantumState::from_matrix(kron(zero.matrix(), plus.matrix())).unwrap();
        let c = thm4_task(&rho, None).unwrap();
        assert!((c.ratio - 1.0).abs() < 1e-5, "{}", c.ratio);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(thm4_task(&named_state("T").unwrap(), None), Err(Error::UnsupportedDimension(_))));
        let mut cnot = ComplexMatrix::identity(4);
        cnot[(2, 2)] = crate::linalg::matrix::ZERO;
        cnot[(3, 3)] = crate::linalg::matrix::ZERO;
        cnot[(2, 3)] = crate::linalg::matrix::ONE;
        cnot[(3, 2)] = crate::linalg::matrix::ONE;
        let ch = Instrument::channel(vec![cnot], "cnot").unwrap();
        assert!(matches!(thm4_task(&named_state("bell").unwrap(), Some(&ch)), Err(Error::InvalidChannel(_))));
    }
}
