//! Tasks built from a general witness operator: the binary channel
//! discrimination with strict advantage and the shift-unitary task whose
//! ratio equals `1 + R`.

use crate::discrimination::{
    best_free_probability, helstrom_binary, success_probability, Instrument, MeasurementClassKind, Povm, Subchannel,
};
use crate::error::{Error, Result};
use crate::free_sets::FreeSet;
use crate::linalg::eigen::eig_matrix;
use crate::linalg::hermitian::{QuantumState, UnitaryOperator};
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::linalg::ops::operator_norm;
use crate::linalg::unitaries::shift_unitaries;
use crate::robustness::generalized_robustness_with;

use super::{ratio_tolerance, AdvantageCertificate, Check, Construction, SynthesisOptions};

/// Two channels distinguishing `ρ` better than any free state, and the
/// equal-prior task built from them.
#[derive(Debug, Clone)]
pub struct Thm1Channels {
    pub lambda0: Instrument,
    pub lambda1: Instrument,
    /// `X = I − W/‖W‖∞` with `W = I − X_dual`.
    pub x: ComplexMatrix,
    pub margin: f64,
    /// `(Tr(ρX) − 1)/(2‖X‖∞)`
    pub margin_bound: f64,
    pub certificate: AdvantageCertificate,
}

pub fn thm1_channels(rho: &QuantumState, f: &FreeSet) -> Result<Thm1Channels> {
    thm1_channels_with(rho, f, &SynthesisOptions::default())
}

pub fn thm1_channels_with(rho: &QuantumState, f: &FreeSet, opts: &SynthesisOptions) -> Result<Thm1Channels> {
    let rob = generalized_robustness_with(rho, f, &opts.solver)?;
    // states within the solver's resolution of F certify nothing
    if rob.value <= opts.solver.gap_tolerance || rob.dual_value <= 0.0 {
        return Err(Error::NotAResourceState);
    }
    let d = rho.dim();
    let identity = ComplexMatrix::identity(d);
    let w = &identity - rob.witness.x.as_matrix();
    let w_norm = operator_norm(&w);
    let x = (&identity - &w.scale(1.0 / w_norm)).hermitian_part();
    let spectrum = eig_matrix(&x)?;
    let x_norm = spectrum.max();

    let ket = |b: usize| {
        let mut v = vec![C64::new(0.0, 0.0); 2];
        v[b] = C64::new(1.0, 0.0);
        v
    };
    let measure_prepare = |flip: bool| -> Vec<ComplexMatrix> {
        let mut kraus = Vec::with_capacity(2 * d);
        for (xk, ek) in spectrum.eigenvalues.iter().zip(&spectrum.eigenvectors) {
            let xt = (xk / x_norm).clamp(-1.0, 1.0);
            let (up, down) = if flip { (1, 0) } else { (0, 1) };
            kraus.push(ComplexMatrix::outer(&ket(up), ek).scale(((1.0 + xt) / 2.0).sqrt()));
            kraus.push(ComplexMatrix::outer(&ket(down), ek).scale(((1.0 - xt) / 2.0).sqrt()));
        }
        kraus
    };
    let lambda0 = Instrument::channel(measure_prepare(false), "lambda0")?;
    let lambda1 = Instrument::channel(measure_prepare(true), "lambda1")?;
    let task = Instrument::new(vec![
        Subchannel::new(lambda0.total_kraus().iter().map(|k| k.scale(0.5f64.sqrt())).collect(), "half_lambda0")?,
        Subchannel::new(lambda1.total_kraus().iter().map(|k| k.scale(0.5f64.sqrt())).collect(), "half_lambda1")?,
    ])?;

    let out0 = QuantumState::from_trusted(&lambda0.apply_total(rho.matrix()), false);
    let out1 = QuantumState::from_trusted(&lambda1.apply_total(rho.matrix()), false);
    let (p_helstrom, povm) = helstrom_binary(&out0, &out1, 0.5, 0.5)?;
    let p_resource = success_probability(&task, &povm, rho)?;
    let p_free_best = best_free_probability(&task, &povm, f)?;
    let margin = p_resource - p_free_best;
    let margin_bound = (rho.expectation(&x) - 1.0) / (2.0 * x_norm);

    let checks = vec![
        Check::within("lambda0_cptp", lambda0.completeness_residual(), 1e-9),
        Check::within("lambda1_cptp", lambda1.completeness_residual(), 1e-9),
        Check::flag("witness_separates", rho.expectation(&w) < 0.0, rho.expectation(&w)),
        Check::within("helstrom_matches_task", (p_helstrom - p_resource).abs(), 1e-10),
        Check::flag("margin_positive", margin > 0.0, margin),
        Check::flag("margin_bound", margin >= margin_bound - 1e-7, margin_bound - margin),
    ];
    let certificate = AdvantageCertificate {
        construction: Construction::Thm1,
        task,
        povm,
        p_resource,
        p_free_best,
        ratio: p_resource / p_free_best,
        robustness: rob,
        checks,
        notes: Vec::new(),
    };
    Ok(Thm1Channels { lambda0, lambda1, x, margin, margin_bound, certificate })
}

pub fn thm2_task(rho: &QuantumState, f: &FreeSet) -> Result<AdvantageCertificate> {
    thm2_task_with(rho, f, &SynthesisOptions::default())
}

/// `Ψ_i = (1/d)U_i·U_i†` with shift unitaries on the eigenbasis of the
/// optimal witness `X`, measured by `M_i = U_iXU_i†/Tr(X)`.
pub fn thm2_task_with(rho: &QuantumState, f: &FreeSet, opts: &SynthesisOptions) -> Result<AdvantageCertificate> {
    let rob = generalized_robustness_with(rho, f, &opts.solver)?;
    let x = rob.witness.x.as_matrix().clone();
    let d = rho.dim();
    let spectrum = eig_matrix(&x)?;
    let unitaries = shift_unitaries(&spectrum.eigenvectors)?;
    let tr_x = x.trace().re;
    let weight = 1.0 / d as f64;
    let subchannels = unitaries
        .iter()
        .enumerate()
        .map(|(i, u)| Subchannel::unitary(u.as_matrix(), weight, format!("shift_{i}")))
        .collect::<Result<Vec<_>>>()?;
    let task = Instrument::new(subchannels)?;
    let povm = Povm::trusted(unitaries.iter().map(|u| u.conjugate(&x).scale(1.0 / tr_x)).collect(), MeasurementClassKind::Unconstrained);
    let p_resource = success_probability(&task, &povm, rho)?;
    let p_free_best = best_free_probability(&task, &povm, f)?;
    let ratio = p_resource / p_free_best;
    let tol = ratio_tolerance(&rob);
    let checks = vec![
        Check::within("povm_completeness", povm.completeness_residual(), 1e-9),
        Check::within("task_cptp", task.completeness_residual(), 1e-9),
        Check::within("p_resource_closed_form", (p_resource - rho.expectation(&x) / tr_x).abs(), 1e-10),
        Check::within("ratio_matches_robustness", (ratio - 1.0 - rob.value).abs(), tol),
    ];
    let mut notes = Vec::new();
    if rob.value <= opts.solver.gap_tolerance {
        notes.push("input is free within the solver gap".into());
    }
    Ok(AdvantageCertificate {
        construction: Construction::Thm2,
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop3Check {
    pub condition_holds: bool,
    /// `max_j ‖Σ_i U_i|e_j⟩⟨e_j|U_i† − I‖_max`
    pub completeness_residual: f64,
    /// `max ‖U_iσU_i† − U_jσU_j†‖_max` over vertices `σ` and pairs `i, j`.
    pub conjugation_residual: f64,
}

/// Tests whether the unitaries permit a task on which no free state beats
/// blind guessing.
pub fn prop3_verify(f: &FreeSet, basis: &[Vec<C64>], unitaries: &[UnitaryOperator]) -> Result<Prop3Check> {
    if !f.is_polytope() {
        return Err(Error::invalid("conjugation check needs a polytope free set"));
    }
    let d = f.dim();
    if basis.len() != d || basis.iter().any(|v| v.len() != d) || unitaries.iter().any(|u| u.dim() != d) || unitaries.is_empty() {
        return Err(Error::invalid("basis and unitaries must match the free set dimension"));
    }
    let identity = ComplexMatrix::identity(d);
    let mut completeness_residual: f64 = 0.0;
    for e in basis {
        let p = ComplexMatrix::projector(e);
        let mut sum = ComplexMatrix::zeros(d, d);
        for u in unitaries {
            sum += &u.conjugate(&p);
        }
        completeness_residual = completeness_residual.max(sum.max_abs_diff(&identity));
    }
    let mut conjugation_residual: f64 = 0.0;
    for v in f.vertices() {
        let images: Vec<ComplexMatrix> = unitaries.iter().map(|u| u.conjugate(v.matrix())).collect();
        for i in 0..images.len() {
            for j in (i + 1)..images.len() {
                conjugation_residual = conjugation_residual.max(images[i].max_abs_diff(&images[j]));
            }
        }
    }
    Ok(Prop3Check {
        condition_holds: completeness_residual <= 1e-9 && conjugation_residual <= 1e-9,
        completeness_residual,
        conjugation_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_sets::{make_free_set, FreeSetSpec};
    use crate::synthesis::named_state;

    fn incoherent2() -> FreeSet {
        make_free_set(&FreeSetSpec::Incoherent { dim: 2 }).unwrap()
    }

    #[test]
    fn thm1_plus_state() {
        let r = thm1_channels(&named_state("plus").unwrap(), &incoherent2()).unwrap();
        let c = &r.certificate;
        assert!((c.p_resource - 1.0).abs() < 1e-6, "{}", c.p_resource);
        assert!((c.p_free_best - 0.75).abs() < 1e-6, "{}", c.p_free_best);
        assert!((r.margin - 0.25).abs() < 1e-6);
        assert!(c.all_passed(), "{:?}", c.checks);
        assert!(matches!(thm1_channels(&named_state("zero").unwrap(), &incoherent2()), Err(Error::NotAResourceState)));
    }

    #[test]
    fn thm2_reference_ratios() {
        let c = thm2_task(&named_state("plus").unwrap(), &incoherent2()).unwrap();
        assert!((c.ratio - 2.0).abs() < 1e-5 && c.all_passed());
        assert!((c.p_free_best - 0.5).abs() < 1e-6);
        let stab = make_free_set(&FreeSetSpec::StabilizerQubit).unwrap();
        let c = thm2_task(&named_state("T").unwrap(), &stab).unwrap();
        assert!((c.ratio - (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-5 && c.all_passed());
        let c = thm2_task(&named_state("zero").unwrap(), &stab).unwrap();
        assert!((c.ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn prop3_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = incoherent2();
        let pm = vec![vec![C64::new(s, 0.0), C64::new(s, 0.0)], vec![C64::new(s, 0.0), C64::new(-s, 0.0)]];
        let comp = vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)], vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
        let id = UnitaryOperator::identity(2);
        let z = UnitaryOperator::new(crate::linalg::unitaries::pauli_z()).unwrap();
        let x = UnitaryOperator::new(crate::linalg::unitaries::pauli_x()).unwrap();
        assert!(prop3_verify(&f, &pm, &[id.clone(), z]).unwrap().condition_holds);
        assert!(!prop3_verify(&f, &comp, &[id.clone(), x]).unwrap().condition_holds);
        let r = prop3_verify(&f, &pm, &[id.clone(), id]).unwrap();
        assert!(!r.condition_holds && (r.completeness_residual - 1.0).abs() < 1e-12);
    }
}
