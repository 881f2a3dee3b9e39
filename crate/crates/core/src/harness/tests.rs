use std::sync::Arc;

use super::corpus::{hat, hat_instance, random_bernoulli, random_matroid};
use super::*;
use crate::exante::{decompose, solve_exante};
use crate::instance::{ArrivalModel, BernoulliInstance};
use crate::matroid::Matroid;
use crate::rng::substream;
use crate::schemes::{NeverAccept, OnlineScheme, QuarterBaseline, Rank1Ocrs, ThresholdScheme};

fn pair_adversarial() -> (BernoulliInstance, ThresholdScheme) {
    let m = Arc::new(Matroid::uniform(2, 1).unwrap());
    let inst = BernoulliInstance::new(m.clone(), vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
    let sol = solve_exante(&inst).unwrap();
    let dec = decompose(&sol.x, &m).unwrap();
    let s = ThresholdScheme::adversarial(&inst, &sol, &dec, vec![0, 1]).unwrap();
    (inst, s)
}

#[test]
fn exact_selectability_examples() {
    let r = exact_selectability(&Rank1Ocrs::new(vec![0.5, 0.5], vec![0, 1]).unwrap(), "h").unwrap();
    assert_eq!(r.c, Some(0.5));
    let r = exact_selectability(&QuarterBaseline::new(vec![1.0], vec![0]).unwrap(), "h").unwrap();
    assert_eq!(r.c, Some(0.5));
    let m = Arc::new(Matroid::uniform(2, 1).unwrap());
    let r = exact_selectability(&NeverAccept::new(m, vec![0.5, 0.5], ArrivalModel::identity(2)).unwrap(), "h").unwrap();
    assert_eq!(r.c, Some(0.0));
}

#[test]
fn estimates_agree_with_exact() {
    let ocrs = Rank1Ocrs::new(vec![0.5, 0.5], vec![0, 1]).unwrap();
    let est = estimate_selectability(&ocrs, "h", 100_000, 1).unwrap();
    for e in &est.elements {
        assert!((e.p_select - 0.25).abs() <= 3.0 * e.se, "{e:?}");
    }
    let m = Arc::new(Matroid::uniform(2, 1).unwrap());
    let never = estimate_selectability(&NeverAccept::new(m, vec![0.5, 0.5], ArrivalModel::RandomOrder).unwrap(), "h", 1000, 1).unwrap();
    assert!(never.elements.iter().all(|e| e.p_select == 0.0 && e.se == 0.0));
}

#[test]
fn enumeration_matches_policy_propagation() {
    let inst = hat_instance(2).unwrap();
    let sol = solve_exante(&inst).unwrap();
    let dec = decompose(&sol.x, &inst.matroid).unwrap();
    let s = ThresholdScheme::adversarial(&inst, &sol, &dec, vec![4, 0, 2, 1, 3]).unwrap();
    let by_runs = enumerate_selection(&s).unwrap();
    let by_policy = s.exact_selection().unwrap().unwrap();
    for (a, b) in by_runs.iter().zip(&by_policy) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn ratio_examples() {
    let (_, s) = pair_adversarial();
    assert!((exact_value(&s).unwrap().unwrap() - 0.75).abs() < 1e-15);
    let r = measure_ratio(&s, 1.0, "h", 100_000, 2).unwrap();
    assert!((r.e_alg - 0.75).abs() <= 3.0 * r.se);
    assert!((r.e_alg - r.e_revenue - r.e_utility).abs() < 1e-12);
    assert!(r.meets(0.5, 3.0));
    let zero = measure_ratio(&s, 0.0, "h", 10, 2).unwrap();
    assert_eq!(zero.ratio, None);
}

#[test]
fn offline_examples_and_dominance() {
    let (inst, _) = pair_adversarial();
    assert!((brute_force_offline(&inst).unwrap() - 0.75).abs() < 1e-15);
    let sure = BernoulliInstance::new(inst.matroid.clone(), vec![1.0, 1.0], vec![2.0, 3.0]).unwrap();
    assert_eq!(brute_force_offline(&sure).unwrap(), 3.0);
    let mut rng = substream(5, 0);
    for k in 0..10 {
        let m = Arc::new(random_matroid(k, 8, &mut rng).unwrap());
        let inst = random_bernoulli(m, &mut rng).unwrap();
        let sol = solve_exante(&inst).unwrap();
        assert!(sol.objective >= brute_force_offline(&inst).unwrap() - 1e-9);
    }
}

#[test]
fn optimality_numbers() {
    let r = optimality_experiments(0.01, &[5, 50], 0, 0).unwrap();
    assert!(r.two_element.c_star >= 0.5 - 1e-9 && r.two_element.c_star <= 0.505 + 1e-6);
    assert!((r.rank1[0].ceiling - 0.67232).abs() < 1e-12);
    assert!((r.rank1[0].p_none_exact - r.rank1[0].p_none_analytic).abs() < 1e-12);
    assert!((r.rank1[1].ceiling - 0.635830).abs() < 1e-6);
}

#[test]
fn hat_straw_man_degrades() {
    let r = hat_regression(&[2, 4, 6], 2, 20_000, 3).unwrap();
    let exact: Vec<f64> = r.straw_man.iter().map(|p| p.exact.unwrap()).collect();
    for (p, h) in exact.iter().zip([2, 4, 6]) {
        assert!((p - 0.75f64.powi(h)).abs() < 1e-12);
    }
    assert!(exact[2] < 0.5);
    assert!(r.lp_certified_c >= 0.5 - 1e-6 && r.lp_verified_c >= 0.5 - 1e-6);
    assert!(r.threshold_worst_ratio >= 0.5);
}

#[test]
fn base_price_bound_on_hat() {
    let inst = hat_instance(2).unwrap();
    let sol = solve_exante(&inst).unwrap();
    let dec = decompose(&sol.x, &inst.matroid).unwrap();
    let check = check_base_price_bound(&inst.matroid, &dec, &sol.y).unwrap();
    assert!(check.checked > 0 && check.holds(1e-12), "{check:?}");
}

#[test]
fn reports_are_reproducible_and_csv_shaped() {
    let (_, s) = pair_adversarial();
    let a = estimate_selectability(&s, "h", 5000, 9).unwrap().to_json().unwrap();
    let b = estimate_selectability(&s, "h", 5000, 9).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    let mut buf = Vec::new();
    exact_selectability(&s, "h").unwrap().write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("element,x_i,p_select,mode,se,trials\n0,0.5,0.5,exact,0,0\n"));
}

#[test]
fn hat_point_matches_figure() {
    let (m, x) = hat(2).unwrap();
    assert_eq!(x, vec![0.5, 0.5, 0.5, 0.5, 1.0]);
    assert_eq!(m.rank(m.ground()).unwrap(), 3);
}
