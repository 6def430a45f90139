use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qadv::discrimination::{
    best_free_probability, check_povm_optimality, effective_observable, helstrom_binary, optimal_povm, success_probability, Ensemble,
    MeasurementClass,
};
use qadv::free_sets::{make_free_set, FreeSetSpec};
use qadv::linalg::{min_eigenvalue, QuantumState, C64};
use qadv::report::{to_canonical_string, StateSpec};
use qadv::robustness::generalized_robustness;
use qadv::sampling::{random_instrument, random_ket, random_mixed_state, random_povm, random_pure_state};
use qadv::synthesis::thm2_task;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn success_probability_is_affine_and_bounded(seed in any::<u64>(), t in 0.0f64..=1.0, d in 2usize..=4, n in 1usize..=4) {
        let mut r = rng(seed);
        let task = random_instrument(&mut r, n, 2, d, d);
        let povm = random_povm(&mut r, n, d);
        let a = random_mixed_state(&mut r, d);
        let b = random_pure_state(&mut r, d);
        let pa = success_probability(&task, &povm, &a).unwrap();
        let pb = success_probability(&task, &povm, &b).unwrap();
        let pm = success_probability(&task, &povm, &a.mix(t, &b)).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&pa));
        prop_assert!((pm - (t * pa + (1.0 - t) * pb)).abs() <= 1e-12);
    }

    #[test]
    fn effective_observable_reproduces_success_probability(seed in any::<u64>(), d in 2usize..=4, n in 1usize..=4) {
        let mut r = rng(seed);
        let task = random_instrument(&mut r, n, 2, d, d);
        let povm = random_povm(&mut r, n, d);
        let e = effective_observable(&task, &povm).unwrap();
        for _ in 0..5 {
            let sigma = random_mixed_state(&mut r, d);
            let direct = success_probability(&task, &povm, &sigma).unwrap();
            prop_assert!((sigma.expectation(e.as_matrix()) - direct).abs() <= 1e-10);
        }
    }

    #[test]
    fn state_documents_round_trip(amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..=4)) {
        let spec = StateSpec::Pure { amplitudes: amps.iter().map(|&(a, b)| [a, b]).collect() };
        let again = StateSpec::parse(&spec.to_canonical(), "mem").unwrap();
        prop_assert_eq!(spec, again);
    }

    #[test]
    fn canonical_reals_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let text = to_canonical_string(&serde_json::json!({ "x": x }));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let back = v["x"].as_f64().unwrap();
        prop_assert!(back == x && (back.to_bits() == x.to_bits() || x == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn optimal_measurement_matches_helstrom_and_is_certified(seed in any::<u64>(), q0 in 0.05f64..0.95, d in 2usize..=3) {
        let mut r = rng(seed);
        let a = random_mixed_state(&mut r, d);
        let b = random_mixed_state(&mut r, d);
        let (p, _) = helstrom_binary(&a, &b, q0, 1.0 - q0).unwrap();
        let ens = Ensemble::new(vec![q0, 1.0 - q0], vec![a, b]).unwrap();
        let best = optimal_povm(&ens, &MeasurementClass::Unconstrained).unwrap();
        prop_assert!((best.p_opt - p).abs() <= 1e-6);
        prop_assert!(check_povm_optimality(&ens, &best.povm, 1e-7).unwrap().optimal);
    }

    #[test]
    fn restricted_measurements_never_beat_unrestricted(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let f = make_free_set(&FreeSetSpec::StabilizerQubit).unwrap();
        let states: Vec<QuantumState> = (0..n).map(|_| random_mixed_state(&mut r, 2)).collect();
        let ens = Ensemble::new(vec![1.0 / n as f64; n], states).unwrap();
        let full = optimal_povm(&ens, &MeasurementClass::Unconstrained).unwrap().p_opt;
        let free_result = optimal_povm(&ens, &MeasurementClass::Free(f.clone())).unwrap();
        let free = free_result.p_opt;
        let bound = free_result.dual_bound.unwrap();
        prop_assert!(bound >= free - 1e-9 && bound <= free + 1e-8);
        let rank_one = optimal_povm(&ens, &MeasurementClass::RankOneFree(f)).unwrap().p_opt;
        prop_assert!(free <= full + 1e-8);
        prop_assert!(rank_one <= free + 1e-8);
        prop_assert!(rank_one >= 1.0 / n as f64 - 1e-9);
    }

    #[test]
    fn no_task_beats_one_plus_robustness(seed in any::<u64>(), n in 2usize..=3) {
        let mut r = rng(seed);
        let f = make_free_set(&FreeSetSpec::StabilizerQubit).unwrap();
        let rho = random_pure_state(&mut r, 2);
        let rob = generalized_robustness(&rho, &f).unwrap();
        for _ in 0..10 {
            let task = random_instrument(&mut r, n, 2, 2, 2);
            let povm = random_povm(&mut r, n, 2);
            let p = success_probability(&task, &povm, &rho).unwrap();
            let q = best_free_probability(&task, &povm, &f).unwrap();
            prop_assert!(p / q <= 1.0 + rob.value + 1e-6);
        }
        let cert = thm2_task(&rho, &f).unwrap();
        prop_assert!((cert.ratio - (1.0 + rob.value)).abs() <= rob.gap + 1e-5);
    }

    #[test]
    fn witness_is_feasible(seed in any::<u64>(), which in 0usize..4) {
        let mut r = rng(seed);
        let spec = [
            FreeSetSpec::Incoherent { dim: 3 },
            FreeSetSpec::StabilizerQubit,
            FreeSetSpec::StabilizerTwoQubit,
            FreeSetSpec::SeparablePpt { dim_a: 2, dim_b: 2 },
        ][which].clone();
        let f = make_free_set(&spec).unwrap();
        let rho = random_mixed_state(&mut r, f.dim());
        let cert = generalized_robustness(&rho, &f).unwrap();
        prop_assert!(min_eigenvalue(cert.witness.x.as_matrix()) >= -1e-9);
        prop_assert!(f.support_value(&cert.witness.x).unwrap() <= 1.0 + 1e-7);
        prop_assert!(cert.gap <= 1e-5);
        prop_assert!(cert.weak_duality_violation() <= 1e-9);
        if let Some(tau) = &cert.optimal_tau {
            let s = cert.value;
            let mixed = rho.mix(1.0 / (1.0 + s), tau);
            prop_assert!(f.membership(&mixed, 1e-6).unwrap());
        }
    }

    #[test]
    fn mixing_with_free_states_does_not_increase_robustness(seed in any::<u64>(), p in 0.1f64..0.9) {
        let mut r = rng(seed);
        let f = make_free_set(&FreeSetSpec::StabilizerQubit).unwrap();
        let rho = random_pure_state(&mut r, 2);
        let v = &f.vertices()[(seed % 6) as usize];
        let base = generalized_robustness(&rho, &f).unwrap().value;
        let mixed = generalized_robustness(&rho.mix(1.0 - p, v), &f).unwrap().value;
        prop_assert!(mixed <= base + 1e-6);
    }

    #[test]
    fn pure_state_coherence_closed_form(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let ket: Vec<C64> = random_ket(&mut r, d);
        let l1: f64 = ket.iter().map(|a| a.norm()).sum();
        let f = make_free_set(&FreeSetSpec::Incoherent { dim: d }).unwrap();
        let cert = generalized_robustness(&QuantumState::from_ket(&ket).unwrap(), &f).unwrap();
        assert_abs_diff_eq!(cert.value, l1 * l1 - 1.0, epsilon = 1e-5);
    }
}
