use dicke_core::collective_spin::binomial::binomial_pmf;
use dicke_core::harness::{parse_quantity, trial_rng, Dimension};
use dicke_core::metrology::{jz2_variance, min_variance};
use dicke_core::noise::{decay_prob, dephasing_flip_prob, success_lower_bound, NoiseModel, TieRule};
use dicke_core::oracle::full_pe_run;
use dicke_core::phase_estimation::{accumulate, bits_required, decode, make_plan, run_preparation};
use proptest::prelude::*;

fn even(max_half: usize) -> impl Strategy<Value = usize> {
    (1..=max_half).prop_map(|h| 2 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn full_rounds_project_onto_one_dicke_state(n in even(100), seed in any::<u64>()) {
        let plan = make_plan(n, 1.0, None).unwrap();
        let rec = run_preparation(&plan, &mut trial_rng(seed, 0)).unwrap();
        prop_assert!((rec.fidelity - 1.0).abs() < 1e-10);
        prop_assert!(!rec.ambiguous);
        // the sampled path is as likely as the Born weight of the outcome
        let half = (n / 2) as i64;
        let p = binomial_pmf(n as u64, (half - rec.decoded_mz) as u64, 0.5);
        prop_assert!((rec.path_probability() - p).abs() < 1e-9 * p.max(1e-300) + 1e-14);
    }

    #[test]
    fn truncated_support_is_one_residue_class(n in even(150), rounds in 1u32..5, seed in any::<u64>()) {
        let rounds = rounds.min(bits_required(n));
        let plan = make_plan(n, 1.0, Some(rounds)).unwrap();
        let rec = run_preparation(&plan, &mut trial_rng(seed, 1)).unwrap();
        let period = 1i64 << rounds;
        let half = (n / 2) as i64;
        for i in rec.final_state.support(1e-12) {
            prop_assert_eq!((i as i64 - half - rec.decoded_mz).rem_euclid(period), 0);
        }
    }

    #[test]
    fn exact_bits_decode_back(n in even(5000), frac in 0.0f64..1.0) {
        let half = (n / 2) as i64;
        let m = (-half) + (frac * n as f64).floor() as i64;
        let k = bits_required(n);
        let target = m.rem_euclid(1i64 << k) as u64;
        let mut a = 0;
        for j in 1..=k {
            a = accumulate(a, j, ((target >> (j - 1)) & 1) as u8);
        }
        prop_assert_eq!(a, target);
        prop_assert_eq!(decode(a, k).unwrap(), m);
    }

    #[test]
    fn oracle_agrees_with_collective(half in 1usize..=4, seed in any::<u64>()) {
        let plan = make_plan(2 * half, 5e6, None).unwrap();
        let full = full_pe_run(&plan, &mut trial_rng(seed, 2)).unwrap();
        let coll = run_preparation(&plan, &mut trial_rng(seed, 2)).unwrap();
        prop_assert_eq!(&full.record.bits, &coll.bits);
        for (a, b) in full.record.born_probabilities.iter().zip(&coll.born_probabilities) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rates_are_probabilities_and_monotone(t in 0.0f64..1e-5, dt in 0.0f64..1e-5, t1 in 1e-7f64..1e-3, tphi in 1e-7f64..1e-3) {
        let (q0, q1) = (dephasing_flip_prob(t, tphi).unwrap(), dephasing_flip_prob(t + dt, tphi).unwrap());
        let (d0, d1) = (decay_prob(t, t1).unwrap(), decay_prob(t + dt, t1).unwrap());
        prop_assert!((0.0..=0.5).contains(&q0) && q0 <= q1);
        prop_assert!((0.0..=1.0).contains(&d0) && d0 <= d1);
    }

    #[test]
    fn bound_is_a_probability_and_improves_with_coherence(k in 1u32..25, m in 1u32..12, t1 in 1e-6f64..1e-3, tphi in 1e-7f64..1e-4) {
        let noise = NoiseModel { t1, t_phi: tphi, ..NoiseModel::noiseless(5e6) };
        let better = NoiseModel { t_phi: 2.0 * tphi, ..noise };
        let b = success_lower_bound(k, m, &noise, TieRule::Coin).unwrap().total;
        let c = success_lower_bound(k, m, &better, TieRule::Coin).unwrap().total;
        prop_assert!((0.0..=1.0 + 1e-12).contains(&b));
        prop_assert!(c >= b - 1e-12);
    }

    #[test]
    fn closed_form_is_the_minimum_at_zero_tilt(half in 2usize..200, theta in 1e-4f64..1.5) {
        let n = 2 * half;
        let v = jz2_variance(n, 0, theta).unwrap();
        prop_assert!(v >= min_variance(n, 0).unwrap() * (1.0 - 1e-9));
    }

    #[test]
    fn quantity_units_scale(x in 1e-3f64..1e3) {
        let ns = parse_quantity(&format!("{x} ns"), Dimension::Time).unwrap();
        prop_assert!((ns - x * 1e-9).abs() <= 1e-15 * ns);
        let mhz = parse_quantity(&format!("{x}MHz"), Dimension::Rate).unwrap();
        prop_assert!((mhz - x * 1e6).abs() <= 1e-15 * mhz);
    }
}
