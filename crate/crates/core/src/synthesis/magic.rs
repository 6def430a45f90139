//! Single-qubit magic tasks: the rank-one free measurement construction for
//! pure states and the T-state phase-flip demonstration.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::discrimination::{
    best_free_probability, optimal_povm, success_probability, Ensemble, Instrument, MeasurementClass, MeasurementClassKind,
    Povm, Subchannel,
};
use crate::error::{Error, Result};
use crate::free_sets::{basis_vector, make_free_set, FreeSet, FreeSetSpec};
use crate::linalg::bloch::{bloch_vector, ket_from_angles, ket_from_direction, norm3};
use crate::linalg::hermitian::{QuantumState, UnitaryOperator};
use crate::linalg::matrix::{inner, ComplexMatrix, I};
use crate::linalg::unitaries::{pauli_x, pauli_y, pauli_z, qubit_clifford_rotations, rotate, rotation};
use crate::robustness::generalized_robustness_with;

use super::named::{t_bar_ket, t_ket};
use super::{ratio_tolerance, AdvantageCertificate, Check, Construction, SynthesisOptions};

/// Rank-one witness `X = c|w⟩⟨w|` for a pure qubit state against the
/// stabilizer octahedron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOneWitness {
    /// Bloch vector of `|w⟩`.
    pub direction: [f64; 3],
    /// `c = 1/max_{σ∈STAB} ⟨w|σ|w⟩`
    pub c: f64,
    /// `c |⟨w|ψ⟩|²`
    pub value: f64,
}

fn witness_objective(n: [f64; 3], r: [f64; 3]) -> f64 {
    let linf = n.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    (1.0 + n[0] * r[0] + n[1] * r[1] + n[2] * r[2]) / (1.0 + linf)
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let l = norm3(v);
    [v[0] / l, v[1] / l, v[2] / l]
}

/// Compass search over unit Bloch directions `n` maximizing
/// `(1 + n·r)/(1 + ‖n‖∞)`, started from `r` and the octahedron's face and
/// vertex directions.
pub fn rank_one_witness(psi: &QuantumState) -> Result<RankOneWitness> {
    if psi.dim() != 2 {
        return Err(Error::UnsupportedDimension("rank-one witness search needs a qubit".into()));
    }
    let r = bloch_vector(psi.matrix());
    let mut moves = Vec::new();
    for a in -1i32..=1 {
        for b in -1i32..=1 {
            for c in -1i32..=1 {
                if (a, b, c) != (0, 0, 0) {
                    moves.push(unit([a as f64, b as f64, c as f64]));
                }
            }
        }
    }
    let mut starts = vec![unit(r)];
    starts.extend(moves.iter().copied());
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0, 1.0]);
    for start in starts {
        let mut n = start;
        let mut val = witness_objective(n, r);
        let mut h = 0.5;
        while h > 1e-13 {
            let mut improved = false;
            for m in &moves {
                let cand = unit([n[0] + h * m[0], n[1] + h * m[1], n[2] + h * m[2]]);
                let v = witness_objective(cand, r);
                if v > val {
                    n = cand;
                    val = v;
                    improved = true;
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        if val > best.0 + 1e-15 {
            best = (val, n);
        }
    }
    let n = best.1;
    let linf = n.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    Ok(RankOneWitness { direction: n, c: 2.0 / (1.0 + linf), value: best.0 })
}

/// Frame in which `|w⟩` lies in the positive octant with `|0⟩` the closest
/// stabilizer state.
#[derive(Debug, Clone)]
pub struct CanonicalFrame {
    pub clifford: UnitaryOperator,
    pub rotated: [f64; 3],
    pub theta: f64,
    pub phi: f64,
}

/// Picks among the 24 octahedral rotations one taking `n` into
/// `{x, y ≥ 0, z ≥ max(x, y)}`; ties go to the lexicographically largest
/// rotated vector.
pub fn canonical_frame(n: [f64; 3]) -> CanonicalFrame {
    let eps = 1e-12;
    let mut best: Option<(UnitaryOperator, [f64; 3])> = None;
    for (u, perm) in qubit_clifford_rotations() {
        let r = perm.map(|row| row.map(f64::from));
        let m = rotate(&r, n);
        if m[0] < -eps || m[1] < -eps || m[2] < m[0] - eps || m[2] < m[1] - eps {
            continue;
        }
        let better = match &best {
            None => true,
            Some((_, b)) => m.partial_cmp(b) == Some(std::cmp::Ordering::Greater),
        };
        if better {
            best = Some((u, m));
        }
    }
    let (clifford, rotated) = best.expect("octahedral rotations cover the sphere");
    let theta = rotated[2].clamp(-1.0, 1.0).acos();
    let phi = if rotated[0].max(0.0) == 0.0 && rotated[1].max(0.0) == 0.0 { 0.0 } else { rotated[1].max(0.0).atan2(rotated[0].max(0.0)) };
    CanonicalFrame { clifford, rotated, theta, phi }
}

/// Largest `θ` with `|0⟩` the closest stabilizer state at azimuth `φ`.
pub fn theta_limit(phi: f64) -> f64 {
    (1.0 / phi.cos().max(phi.sin())).atan()
}

/// The three axis-measurement success probabilities on input `|+⟩` for the
/// rotations `R_n(θ)`, `R_n(θ+π)`: closed forms next to direct evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisProbabilities {
    /// Z, X, Y axis.
    pub closed: [f64; 3],
    pub direct: [f64; 3],
    /// `½(1 + cos θ)`
    pub bound: f64,
}

pub fn prop6_axis_probabilities(theta: f64, phi: f64) -> Result<AxisProbabilities> {
    let axis = [phi.sin(), -phi.cos(), 0.0];
    let u1 = rotation(axis, theta)?;
    let u2 = rotation(axis, theta + PI)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| crate::linalg::matrix::C64::new(re, im);
    let plus = vec![c(s, 0.0), c(s, 0.0)];
    let pairs = [
        (basis_vector(2, 0), basis_vector(2, 1)),
        (vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]),
        (vec![c(s, 0.0), c(0.0, s)], vec![c(s, 0.0), c(0.0, -s)]),
    ];
    let a = u1.apply(&plus);
    let b = u2.apply(&plus);
    let direct = pairs.map(|(x1, x2)| 0.5 * (inner(&x1, &a).norm_sqr() + inner(&x2, &b).norm_sqr()));
    let closed = [
        0.5 * (1.0 + phi.cos() * theta.sin()),
        0.5 * (1.0 + phi.cos() * phi.cos() * theta.cos()),
        0.5 * (1.0 + 0.5 * (2.0 * phi).sin() * theta.cos()),
    ];
    Ok(AxisProbabilities { closed, direct, bound: 0.5 * (1.0 + theta.cos()) })
}

pub fn prop6_task(psi: &QuantumState) -> Result<AdvantageCertificate> {
    prop6_task_with(psi, &SynthesisOptions::default())
}

/// Requires a pure qubit. Rotations `U_1 = R_n(θ)C`, `U_2 = R_n(θ+π)C` send
/// the witness direction `|w⟩` to `|0⟩` and `|1⟩`, read out in the
/// computational basis.
pub fn prop6_task_with(psi: &QuantumState, opts: &SynthesisOptions) -> Result<AdvantageCertificate> {
    if psi.dim() != 2 {
        return Err(Error::UnsupportedDimension("rank-one magic task needs a qubit".into()));
    }
    if psi.purity() < 1.0 - 1e-10 {
        return Err(Error::PureStateRequired);
    }
    let f = make_free_set(&FreeSetSpec::StabilizerQubit)?;
    let rob = generalized_robustness_with(psi, &f, &opts.solver)?;
    let witness = rank_one_witness(psi)?;
    let tol = ratio_tolerance(&rob);
    let mut checks = vec![Check::within("rank_one_witness_optimal", (witness.value - 1.0 - rob.value).abs(), tol)];

    let frame = canonical_frame(witness.direction);
    let (theta, phi) = (frame.theta, frame.phi);
    let in_domain = (-1e-12..=FRAC_PI_2 + 1e-12).contains(&phi) && theta <= theta_limit(phi) + 1e-9;
    checks.push(Check::flag("canonical_domain", in_domain, theta - theta_limit(phi)));

    let axis = [phi.sin(), -phi.cos(), 0.0];
    let c = frame.clifford.as_matrix();
    let u1 = rotation(axis, theta)?.as_matrix().matmul(c);
    let u2 = rotation(axis, theta + PI)?.as_matrix().matmul(c);
    let w = frame.clifford.adjoint().apply(&ket_from_angles(theta, phi));
    let w_direct = ket_from_direction(witness.direction);
    checks.push(Check::within("frame_maps_witness", 1.0 - inner(&w, &w_direct).norm_sqr(), 1e-9));
    let sends = 1.0 - inner(&basis_vector(2, 0), &u1.apply(&w)).norm_sqr() + 1.0 - inner(&basis_vector(2, 1), &u2.apply(&w)).norm_sqr();
    checks.push(Check::within("rotations_send_witness_to_basis", sends, 1e-9));

    let task = Instrument::new(vec![Subchannel::unitary(&u1, 0.5, "rotation_theta")?, Subchannel::unitary(&u2, 0.5, "rotation_theta_pi")?])?;
    let povm = Povm::trusted(vec![ComplexMatrix::projector(&basis_vector(2, 0)), ComplexMatrix::projector(&basis_vector(2, 1))], MeasurementClassKind::RankOneFree);
    checks.push(Check::within("task_cptp", task.completeness_residual(), 1e-9));
    let p_resource = success_probability(&task, &povm, psi)?;
    let overlap = psi.expectation(&ComplexMatrix::projector(&w));
    checks.push(Check::within("p_resource_overlap", (p_resource - overlap).abs(), 1e-9));

    let bound = 0.5 * (1.0 + theta.cos());
    checks.push(Check::within("denominator_is_inverse_c", (bound - 1.0 / witness.c).abs(), 1e-9));
    let axes = prop6_axis_probabilities(theta, phi)?;
    let closed_err = axes.closed.iter().zip(&axes.direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let excess = axes.closed.iter().map(|a| a - axes.bound).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::within("axis_closed_forms", closed_err, 1e-12));
    checks.push(Check::within("axis_bound", excess.max(0.0), 1e-12));
    let exhaustive = free_denominator(&f, &u1, &u2)?;
    checks.push(Check::within("denominator_exhaustive", (exhaustive - bound).max(0.0), 1e-9));

    let p_free_best = bound;
    let ratio = p_resource / p_free_best;
    checks.push(Check::within("ratio_matches_robustness", (ratio - 1.0 - rob.value).abs(), tol));
    let mut notes = Vec::new();
    if rob.value <= opts.solver.gap_tolerance {
        notes.push("input is a stabilizer state; the witness is trivial".into());
    }
    Ok(AdvantageCertificate {
        construction: Construction::Prop6,
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

/// Best rank-one free success over stabilizer inputs, by exact enumeration.
fn free_denominator(f: &FreeSet, u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<f64> {
    let class = MeasurementClass::RankOneFree(f.clone());
    let mut best: f64 = 0.0;
    for v in f.vertices() {
        let states = [u1, u2].iter().map(|u| QuantumState::from_trusted(&u.conjugate(v.matrix()), true)).collect();
        let ens = Ensemble::new(vec![0.5, 0.5], states)?;
        best = best.max(optimal_povm(&ens, &class)?.p_opt);
    }
    Ok(best)
}

/// `U_NC = exp(−i(π/4)(X−Y)/√2)`, with `|T⟩ = U_NC†|0⟩`.
pub fn u_nc() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut gen = pauli_x();
    gen.add_scaled(-1.0, &pauli_y());
    let mut u = ComplexMatrix::identity(2).scale(FRAC_PI_4.cos());
    u += &gen.scale_c(-I * FRAC_PI_4.sin() * s);
    u
}

pub fn sm_demo() -> Result<AdvantageCertificate> {
    sm_demo_with(&SynthesisOptions::default())
}

/// Identity versus phase flip with equal priors, read out in the `T` basis.
pub fn sm_demo_with(opts: &SynthesisOptions) -> Result<AdvantageCertificate> {
    let f = make_free_set(&FreeSetSpec::StabilizerQubit)?;
    let t = QuantumState::from_ket(&t_ket())?;
    let task = Instrument::new(vec![
        Subchannel::unitary(&ComplexMatrix::identity(2), 0.5, "identity")?,
        Subchannel::unitary(&pauli_z(), 0.5, "phase_flip")?,
    ])?;
    let m0 = ComplexMatrix::projector(&t_ket());
    let m1 = ComplexMatrix::projector(&t_bar_ket());
    let povm = Povm::new(vec![m0.clone(), m1])?;
    let u = u_nc();
    let zero = ComplexMatrix::projector(&basis_vector(2, 0));
    let equivalence = u.adjoint_conjugate(&zero).max_abs_diff(&m0);
    let p_resource = success_probability(&task, &povm, &t)?;
    let p_free_best = best_free_probability(&task, &povm, &f)?;
    let rob = generalized_robustness_with(&t, &f, &opts.solver)?;
    let ratio = p_resource / p_free_best;
    let checks = vec![
        Check::within("u_nc_equivalence", equivalence, 1e-12),
        Check::within("povm_completeness", povm.completeness_residual(), 1e-9),
        Check::within("p_resource_one", (p_resource - 1.0).abs(), 1e-12),
        Check::within("ratio_matches_robustness", (ratio - 1.0 - rob.value).abs(), ratio_tolerance(&rob)),
    ];
    Ok(AdvantageCertificate {
        construction: Construction::SmDemo,
        task,
        povm,
        p_resource,
        p_free_best,
        ratio,
        robustness: rob,
        checks,
        notes: Vec::new(),
    })
}
