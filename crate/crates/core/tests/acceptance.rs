//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; the process fails if any line is FAIL.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qadv::discrimination::{
    best_free_probability, check_povm_optimality, helstrom_binary, optimal_povm, success_probability, Ensemble, MeasurementClass, Povm,
};
use qadv::free_sets::{make_free_set, FreeSet, FreeSetSpec};
use qadv::linalg::ops::{kron_vec, partial_transpose_matrix};
use qadv::linalg::unitaries::pauli_family;
use qadv::linalg::{min_eigenvalue, ComplexMatrix, QuantumState, C64};
use qadv::report::{strip_timestamp, to_canonical_string};
use qadv::robustness::{brute_force_robustness_qubit, generalized_robustness, RobustnessCertificate};
use qadv::sampling::{random_instrument, random_ket, random_mixed_state, random_povm, random_pure_state};
use qadv::synthesis::named::{maximally_coherent_ket, phi_plus_ket, t_ket};
use qadv::synthesis::{
    prop5_task, prop5_unitaries, prop6_axis_probabilities, prop6_task, sm_demo, theta_limit, thm1_channels, thm2_task, thm4_task, u_nc,
};
use qadv::Error;

/// Robustness certificates seen by the other criteria, checked for duality.
#[derive(Default)]
struct Ledger {
    max_gap: f64,
    max_violation: f64,
    count: usize,
    worst: String,
}

impl Ledger {
    fn record(&mut self, label: &str, cert: &RobustnessCertificate) {
        self.count += 1;
        if cert.gap > self.max_gap {
            self.max_gap = cert.gap;
            self.worst = label.to_string();
        }
        self.max_violation = self.max_violation.max(cert.weak_duality_violation());
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn set(spec: FreeSetSpec) -> FreeSet {
    make_free_set(&spec).expect("free set")
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pure(amps: &[C64]) -> QuantumState {
    QuantumState::from_ket(amps).expect("pure state")
}

fn l1_squared(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm()).sum::<f64>().powi(2)
}

/// `min s` with `‖r + s t‖₁ ≤ 1 + s` for some `|t| ≤ 1`, by bisection on `s`
/// and a Fibonacci sphere of noise directions.
fn octahedron_robustness_oracle(r: [f64; 3], directions: usize) -> f64 {
    let golden = PI * (3.0 - 5f64.sqrt());
    let dirs: Vec<[f64; 3]> = (0..directions)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / directions as f64;
            let rho = (1.0 - z * z).sqrt();
            let a = golden * k as f64;
            [rho * a.cos(), rho * a.sin(), z]
        })
        .collect();
    let l1 = |v: [f64; 3]| v[0].abs() + v[1].abs() + v[2].abs();
    let feasible = |s: f64| {
        let norm_r = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        norm_r <= s || dirs.iter().any(|t| l1([r[0] + s * t[0], r[1] + s * t[1], r[2] + s * t[2]]) <= 1.0 + s)
    };
    let (mut lo, mut hi) = (0.0, 2.0);
    if feasible(0.0) {
        return 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn bloch(rho: &QuantumState) -> [f64; 3] {
    let m = rho.matrix();
    [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
}

/// Smallest `s` making `(Φ+ + s(I−Φ+)/3)/(1+s)` have a positive partial transpose.
fn isotropic_ppt_bisection() -> f64 {
    let phi = ComplexMatrix::projector(&phi_plus_ket(2));
    let mut rest = ComplexMatrix::identity(4);
    rest.add_scaled(-1.0, &phi);
    let ppt = |s: f64| {
        let mut m = phi.clone();
        m.add_scaled(s / 3.0, &rest);
        min_eigenvalue(&partial_transpose_matrix(&m.scale(1.0 / (1.0 + s)), 2, 2).unwrap()) >= -1e-14
    };
    let (mut lo, mut hi) = (0.0, 4.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ppt(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn criterion_1(ledger: &mut Ledger) -> Outcome {
    let start = Instant::now();
    let w3 = maximally_coherent_ket(3);
    let plus = maximally_coherent_ket(2);
    let t = t_ket();
    let cases: Vec<(&str, QuantumState, FreeSet, f64, f64, f64)> = vec![
        ("plus/incoherent2", pure(&plus), set(FreeSetSpec::Incoherent { dim: 2 }), 1.0, l1_squared(&plus) - 1.0, 1e-9),
        ("w3/incoherent3", pure(&w3), set(FreeSetSpec::Incoherent { dim: 3 }), 2.0, l1_squared(&w3) - 1.0, 1e-9),
        (
            "T/stabilizer",
            pure(&t),
            set(FreeSetSpec::StabilizerQubit),
            3.0 - 2.0 * 2f64.sqrt(),
            octahedron_robustness_oracle(bloch(&pure(&t)), 40_000),
            3.0 / 200.0,
        ),
        ("phi+/ppt", pure(&phi_plus_ket(2)), set(FreeSetSpec::SeparablePpt { dim_a: 2, dim_b: 2 }), 1.0, isotropic_ppt_bisection(), 1e-9),
    ];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut notes = Vec::new();
    for (label, rho, f, expected, oracle, oracle_tol) in cases {
        let cert = generalized_robustness(&rho, &f).expect("robustness");
        ledger.record(label, &cert);
        let dev = (cert.value - expected).abs();
        worst = worst.max(dev);
        ok &= dev <= 1e-5 && (oracle - expected).abs() <= oracle_tol && (cert.value - oracle).abs() <= oracle_tol + 1e-5;
        notes.push(format!("{label} {:.7}", cert.value));
    }
    // the library's grid oracle for the qubit case as well
    let grid = brute_force_robustness_qubit(&pure(&t), &set(FreeSetSpec::StabilizerQubit), 200).expect("grid oracle");
    let grid_ok = (grid - (3.0 - 2.0 * 2f64.sqrt())).abs() <= 3.0 / 200.0;
    let elapsed = start.elapsed();
    outcome(
        ok && grid_ok && elapsed < Duration::from_secs(10),
        format!("{}; max deviation {worst:.1e}; grid oracle {grid:.5}; {:.2?}", notes.join(", "), elapsed),
    )
}

fn free_sets_under_test() -> Vec<(&'static str, FreeSet)> {
    vec![
        ("incoherent2", set(FreeSetSpec::Incoherent { dim: 2 })),
        ("incoherent3", set(FreeSetSpec::Incoherent { dim: 3 })),
        ("stabilizer_qubit", set(FreeSetSpec::StabilizerQubit)),
        ("stabilizer_two_qubit", set(FreeSetSpec::StabilizerTwoQubit)),
        ("separable_ppt", set(FreeSetSpec::SeparablePpt { dim_a: 2, dim_b: 2 })),
    ]
}

fn criterion_2(ledger: &mut Ledger) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut equality_worst: f64 = f64::NEG_INFINITY;
    let mut bound_worst: f64 = f64::NEG_INFINITY;
    let mut instances = 0;
    for (name, f) in free_sets_under_test() {
        let d = f.dim();
        for k in 0..100 {
            let rho = if k % 2 == 0 { random_pure_state(&mut rng, d) } else { random_mixed_state(&mut rng, d) };
            let cert = thm2_task(&rho, &f).expect("thm2 task");
            ledger.record(name, &cert.robustness);
            let one_plus_r = 1.0 + cert.robustness.value;
            equality_worst = equality_worst.max((cert.ratio - one_plus_r).abs() - (cert.robustness.gap + 1e-5));
            // direct recomputation of both sides of the ratio
            let p = success_probability(&cert.task, &cert.povm, &rho).unwrap();
            let q = best_free_probability(&cert.task, &cert.povm, &f).unwrap();
            equality_worst = equality_worst.max((p / q - one_plus_r).abs() - (cert.robustness.gap + 1e-5));
            for _ in 0..50 {
                let outcomes = rng.random_range(2..=3);
                let task = random_instrument(&mut rng, outcomes, 2, d, d);
                let povm = random_povm(&mut rng, outcomes, d);
                let p = success_probability(&task, &povm, &rho).unwrap();
                let q = best_free_probability(&task, &povm, &f).unwrap();
                bound_worst = bound_worst.max(p / q - (one_plus_r + 1e-6));
                instances += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        equality_worst <= 0.0 && bound_worst <= 0.0 && elapsed < Duration::from_secs(120),
        format!(
            "500 synthesized tasks, worst excess over gap+1e-5 {equality_worst:.1e}; {instances} random tasks, worst excess over 1+R+1e-6 {bound_worst:.1e}; {:.2?}",
            elapsed
        ),
    )
}

fn criterion_3(ledger: &mut Ledger) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_margin = f64::INFINITY;
    let mut bound_slack = f64::INFINITY;
    let mut rejected = 0;
    let mut free_trials = 0;
    for (name, f) in free_sets_under_test() {
        let d = f.dim();
        for _ in 0..50 {
            let rho = random_pure_state(&mut rng, d);
            let t = thm1_channels(&rho, &f).expect("thm1 channels");
            ledger.record(name, &t.certificate.robustness);
            min_margin = min_margin.min(t.margin);
            bound_slack = bound_slack.min(t.margin - (t.margin_bound - 1e-7));
        }
        // free inputs: the maximally mixed state and random mixtures of free points
        let mut free_inputs = vec![QuantumState::maximally_mixed(d)];
        if f.is_polytope() {
            for _ in 0..5 {
                let v = f.vertices();
                let a = &v[rng.random_range(0..v.len())];
                let b = &v[rng.random_range(0..v.len())];
                free_inputs.push(a.mix(rng.random::<f64>(), b));
            }
        } else {
            for _ in 0..5 {
                let ket = kron_vec(&random_ket(&mut rng, 2), &random_ket(&mut rng, 2));
                free_inputs.push(pure(&ket));
            }
        }
        for rho in free_inputs {
            free_trials += 1;
            if matches!(thm1_channels(&rho, &f), Err(Error::NotAResourceState)) {
                rejected += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        min_margin > 0.0 && bound_slack >= 0.0 && rejected == free_trials && elapsed < Duration::from_secs(60),
        format!("min margin {min_margin:.3e}, min slack over bound {bound_slack:.1e}, free inputs rejected {rejected}/{free_trials}; {elapsed:.2?}"),
    )
}

fn criterion_4(ledger: &mut Ledger) -> Outcome {
    let cert = sm_demo().expect("demo");
    ledger.record("sm_demo", &cert.robustness);
    let p_free = (1.0 + FRAC_1_SQRT_2) / 2.0;
    let ratio = 4.0 - 2.0 * 2f64.sqrt();
    // measuring Z after U_NC equals projecting onto |T⟩, |T̄⟩
    let u = u_nc();
    let t = t_ket();
    let mut zero = ComplexMatrix::zeros(2, 2);
    zero[(0, 0)] = c(1.0, 0.0);
    let pulled = u.adjoint().matmul(&zero).matmul(&u);
    let mut residual = pulled.max_abs_diff(&ComplexMatrix::projector(&t));
    let mut one = ComplexMatrix::zeros(2, 2);
    one[(1, 1)] = c(1.0, 0.0);
    let pulled_one = u.adjoint().matmul(&one).matmul(&u);
    let t_bar = [c(FRAC_1_SQRT_2, 0.0), -t[1]];
    residual = residual.max(pulled_one.max_abs_diff(&ComplexMatrix::projector(&t_bar)));
    let devs = [(cert.p_resource - 1.0).abs(), (cert.p_free_best - p_free).abs(), (cert.ratio - ratio).abs()];
    outcome(
        devs.iter().all(|x| *x <= 1e-6) && residual <= 1e-12 && cert.all_passed(),
        format!(
            "p_resource {:.9}, p_free_best {:.9}, ratio {:.9}, U_NC residual {residual:.1e}",
            cert.p_resource, cert.p_free_best, cert.ratio
        ),
    )
}

fn criterion_5(ledger: &mut Ledger) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let paulis = pauli_family(2).unwrap();
    let mut worst_qubit: f64 = 0.0;
    let mut worst_joint: f64 = 0.0;
    let mut min_residual = f64::INFINITY;
    for k in 0..200 {
        let a = random_ket(&mut rng, 2);
        let b = random_ket(&mut rng, 2);
        // shifts act on the second factor; the first factor is a spectator
        let qubit: Vec<QuantumState> = paulis.iter().map(|p| pure(&p.apply(&b))).collect();
        let ens = Ensemble::new(vec![0.25; 4], qubit.clone()).unwrap();
        let best = optimal_povm(&ens, &MeasurementClass::Unconstrained).unwrap();
        worst_qubit = worst_qubit.max((best.p_opt - 0.5).abs());
        let n = Povm::new(qubit.iter().map(|s| s.matrix().scale(0.5)).collect()).unwrap();
        min_residual = min_residual.min(check_povm_optimality(&ens, &n, 1e-9).unwrap().min_residual);
        if k < 20 {
            let joint: Vec<QuantumState> = paulis.iter().map(|p| pure(&kron_vec(&a, &p.apply(&b)))).collect();
            let ens = Ensemble::new(vec![0.25; 4], joint).unwrap();
            let best = optimal_povm(&ens, &MeasurementClass::Unconstrained).unwrap();
            worst_joint = worst_joint.max((best.p_opt - 0.5).abs());
        }
    }
    let bell = thm4_task(&pure(&phi_plus_ket(2)), None).expect("bell task");
    ledger.record("thm4 bell", &bell.robustness);
    outcome(
        worst_qubit <= 1e-7 && worst_joint <= 1e-7 && min_residual >= -1e-9 && (bell.ratio - 2.0).abs() <= 1e-4 && bell.all_passed(),
        format!(
            "200 inputs: |p_opt − 1/2| ≤ {worst_qubit:.1e} (two-qubit form {worst_joint:.1e}), min optimality residual {min_residual:.1e}; Bell ratio {:.7}",
            bell.ratio
        ),
    )
}

fn criterion_6(ledger: &mut Ledger) -> Outcome {
    let mut worst_unbiased: f64 = 0.0;
    for d in 2..=6 {
        let us = prop5_unitaries(d).unwrap();
        for u in &us {
            for j in 0..d {
                for l in 0..d {
                    worst_unbiased = worst_unbiased.max((u.as_matrix()[(j, l)].norm_sqr() - 1.0 / d as f64).abs());
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_ratio: f64 = 0.0;
    for d in 2..=4 {
        for _ in 0..100 {
            let ket = random_ket(&mut rng, d);
            let cert = prop5_task(&pure(&ket), None).expect("coherence task");
            ledger.record("prop5", &cert.robustness);
            worst_ratio = worst_ratio.max((cert.ratio - l1_squared(&ket)).abs());
        }
    }
    outcome(
        worst_unbiased <= 1e-12 && worst_ratio <= 1e-5,
        format!("unbiasedness residual {worst_unbiased:.1e} for d = 2..6; 300 pure states, worst |ratio − (Σ|c_j|)²| {worst_ratio:.1e}"),
    )
}

fn criterion_7(ledger: &mut Ledger) -> Outcome {
    let n = 50;
    let mut worst_match: f64 = 0.0;
    let mut worst_bound = f64::NEG_INFINITY;
    for i in 0..n {
        let phi = FRAC_PI_2 * i as f64 / (n - 1) as f64;
        // |0⟩ stays the closest stabilizer state only up to this polar angle
        let limit = theta_limit(phi);
        for k in 0..n {
            let theta = limit * k as f64 / (n - 1) as f64;
            let a = prop6_axis_probabilities(theta, phi).unwrap();
            for axis in 0..3 {
                worst_match = worst_match.max((a.closed[axis] - a.direct[axis]).abs());
                worst_bound = worst_bound.max(a.direct[axis] - a.bound);
            }
            // the closed forms are identities on the whole rectangle too
            let wide = prop6_axis_probabilities((1.0 / 3f64.sqrt()).acos() * k as f64 / (n - 1) as f64, phi).unwrap();
            for axis in 0..3 {
                worst_match = worst_match.max((wide.closed[axis] - wide.direct[axis]).abs());
            }
        }
    }
    let t = prop6_task(&pure(&t_ket())).expect("T task");
    ledger.record("prop6 T", &t.robustness);
    let expected = 4.0 - 2.0 * 2f64.sqrt();
    outcome(
        worst_match <= 1e-12 && worst_bound <= 1e-12 && (t.ratio - expected).abs() <= 1e-5 && t.all_passed(),
        format!("50x50 grid: closed vs direct {worst_match:.1e}, max excess over ½(1+cosθ) {worst_bound:.1e}; T ratio {:.7}", t.ratio),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut min_residual = f64::INFINITY;
    for k in 0..100 {
        let d = 2 + k % 3;
        let (r0, r1) = if k % 2 == 0 {
            (random_mixed_state(&mut rng, d), random_mixed_state(&mut rng, d))
        } else {
            (random_pure_state(&mut rng, d), random_mixed_state(&mut rng, d))
        };
        let q0 = rng.random_range(0.05..0.95);
        let (p_h, _) = helstrom_binary(&r0, &r1, q0, 1.0 - q0).unwrap();
        let ens = Ensemble::new(vec![q0, 1.0 - q0], vec![r0, r1]).unwrap();
        let best = optimal_povm(&ens, &MeasurementClass::Unconstrained).unwrap();
        worst = worst.max((best.p_opt - p_h).abs());
        min_residual = min_residual.min(check_povm_optimality(&ens, &best.povm, 1e-7).unwrap().min_residual);
    }
    let trine: Vec<QuantumState> = (0..3)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / 3.0;
            pure(&[c((a / 2.0).cos(), 0.0), c((a / 2.0).sin(), 0.0)])
        })
        .collect();
    let ens = Ensemble::new(vec![1.0 / 3.0; 3], trine).unwrap();
    let best = optimal_povm(&ens, &MeasurementClass::Unconstrained).unwrap();
    let trine_res = check_povm_optimality(&ens, &best.povm, 1e-7).unwrap().min_residual;
    min_residual = min_residual.min(trine_res);
    outcome(
        worst <= 1e-6 && (best.p_opt - 2.0 / 3.0).abs() <= 1e-6 && min_residual >= -1e-7,
        format!("100 binary ensembles, worst |Helstrom − optimum| {worst:.1e}; trine {:.9}; min optimality residual {min_residual:.1e}", best.p_opt),
    )
}

fn criterion_9(ledger: &Ledger) -> Outcome {
    outcome(
        ledger.max_gap <= 1e-5 && ledger.max_violation <= 1e-9,
        format!(
            "{} certificates, max |primal − dual| {:.1e} ({}), max weak-duality violation {:.1e}",
            ledger.count, ledger.max_gap, ledger.worst, ledger.max_violation
        ),
    )
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_qadv");
    let runs: [&[&str]; 5] = [
        &["robustness", "--state", "T", "--free-set", "stabilizer_qubit", "--timestamp"],
        &["witness", "--state", "w:3", "--free-set", "incoherent:3"],
        &["synthesize", "--state", "bell", "--construction", "thm4", "--seed", "11", "--timestamp"],
        &["simulate", "--state", "T", "--free-set", "stabilizer_qubit", "--seed", "7", "--rounds", "3000"],
        &["demo", "--seed", "4", "--timestamp"],
    ];
    let mut identical = 0;
    for args in runs {
        let texts: Vec<String> = (0..2)
            .map(|_| {
                let out = Command::new(bin).args(args).output().expect("run qadv");
                assert!(out.status.success(), "{args:?} failed");
                let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json");
                strip_timestamp(&mut v);
                to_canonical_string(&v)
            })
            .collect();
        if texts[0] == texts[1] {
            identical += 1;
        }
    }
    outcome(identical == runs.len(), format!("{identical}/{} commands byte-identical across repeated runs", runs.len()))
}

fn main() {
    // `cargo test -- --list` style probes expect no work
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut ledger = Ledger::default();
    let mut results = Vec::new();
    results.push(("robustness values", criterion_1(&mut ledger)));
    results.push(("witness-task ratio equals 1+R", criterion_2(&mut ledger)));
    results.push(("strict advantage of two channels", criterion_3(&mut ledger)));
    results.push(("T-state phase-flip demo", criterion_4(&mut ledger)));
    results.push(("entanglement task denominator", criterion_5(&mut ledger)));
    results.push(("coherence task", criterion_6(&mut ledger)));
    results.push(("magic task axis probabilities", criterion_7(&mut ledger)));
    results.push(("discrimination engine consistency", criterion_8()));
    results.push(("duality", criterion_9(&ledger)));
    results.push(("CLI determinism", criterion_10()));
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("[{}] {:>2}. {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
