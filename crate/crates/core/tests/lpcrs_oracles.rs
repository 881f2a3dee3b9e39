use std::sync::Arc;

use ocrs::exante::{decompose, solve_exante};
use ocrs::harness::corpus::{random_bernoulli, random_matroid, random_point};
use ocrs::lpcrs::{
    best_response, estimate_q, exact_q, exact_q_enumerate, exact_q_permutations, DeterministicPolicy, ExactOptions,
};
use ocrs::rng::substream;
use ocrs::schemes::{OnlineScheme, ThresholdScheme};
use ocrs::ArrivalModel;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagation_matches_enumeration(seed in 0u64..1_000_000, n in 2usize..8) {
        let mut rng = substream(seed, 0);
        let m = Arc::new(random_matroid(seed as usize, n, &mut rng).unwrap());
        let inst = random_bernoulli(m.clone(), &mut rng).unwrap();
        let sol = solve_exante(&inst).unwrap();
        let dec = decompose(&sol.x, &m).unwrap();
        let order = ocrs::instance::random_permutation(n, &mut rng);
        let s = ThresholdScheme::adversarial(&inst, &sol, &dec, order.clone()).unwrap();
        let a = exact_q(&s.policy(), &m, &sol.x, &ArrivalModel::Fixed(order.clone()), &ExactOptions::default()).unwrap();
        let b = exact_q_enumerate(&s.policy(), &m, &sol.x, &order).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn time_free_random_order_matches_permutation_average(seed in 0u64..1_000_000, n in 2usize..6) {
        let mut rng = substream(seed, 1);
        let m = random_matroid(seed as usize, n, &mut rng).unwrap();
        let x = random_point(&m, &mut rng);
        let y: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, 0.0..2.0)).collect();
        let opts = ExactOptions::default();
        let policy = best_response(&y, &m, &x, &ArrivalModel::RandomOrder, &opts).unwrap();
        let a = exact_q(&policy, &m, &x, &ArrivalModel::RandomOrder, &opts).unwrap();
        let b = exact_q_permutations(&policy, &m, &x, 7).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() < 1e-12, "{:?} vs {:?}", a, b);
        }
    }
}

#[test]
fn random_order_threshold_integrator_matches_simulation() {
    let mut rng = substream(31, 0);
    for k in 0..4 {
        let m = Arc::new(random_matroid(k, 5, &mut rng).unwrap());
        let inst = random_bernoulli(m.clone(), &mut rng).unwrap();
        let sol = solve_exante(&inst).unwrap();
        let dec = decompose(&sol.x, &m).unwrap();
        let s = ThresholdScheme::random_order(&inst, &sol, &dec).unwrap();
        let exact = s.exact_selection().unwrap().unwrap();
        let (est, se) = estimate_q(&s.policy(), &m, &sol.x, &ArrivalModel::RandomOrder, 200_000, 40 + k as u64).unwrap();
        for i in 0..5 {
            assert!((exact[i] - est[i]).abs() <= 4.0 * se[i] + 1e-12, "instance {k} element {i}: {} vs {}", exact[i], est[i]);
        }
    }
}

#[test]
fn separation_values_meet_guarantees() {
    let mut rng = substream(32, 0);
    let opts = ExactOptions::default();
    for k in 0..10 {
        let m = Arc::new(random_matroid(k, 5, &mut rng).unwrap());
        let x = random_point(&m, &mut rng);
        let raw: Vec<f64> = (0..5).map(|_| rand::Rng::gen_range(&mut rng, 0.0..1.0)).collect();
        let dual = ocrs::lpcrs::DualPoint::normalized(&raw, &x, 0.0);
        for arrival in [ArrivalModel::identity(5), ArrivalModel::RandomOrder] {
            let out = ocrs::lpcrs::separation_oracle(&dual, &m, &x, &arrival, ocrs::lpcrs::OracleKind::Threshold, &opts).unwrap();
            assert!(out.value >= ocrs::lpcrs::guarantee(&arrival) - 1e-9);
        }
    }
}

#[test]
fn greedy_policy_random_order_matches_simulation() {
    let m = ocrs::Matroid::uniform(4, 2).unwrap();
    let x = [0.9, 0.5, 0.4, 0.2];
    let exact = exact_q(&DeterministicPolicy::Greedy, &m, &x, &ArrivalModel::RandomOrder, &ExactOptions::default()).unwrap();
    let (est, se) = estimate_q(&DeterministicPolicy::Greedy, &m, &x, &ArrivalModel::RandomOrder, 200_000, 3).unwrap();
    for i in 0..4 {
        assert!((exact[i] - est[i]).abs() <= 4.0 * se[i]);
    }
}
