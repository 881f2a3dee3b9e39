use std::sync::Arc;

use super::*;
use crate::exante::{decompose, solve_exante};
use crate::instance::{ArrivalModel, ArrivalOrder, BernoulliInstance};
use crate::matroid::Matroid;
use crate::rng::substream;
use crate::set::ElemSet;

fn pair() -> (BernoulliInstance, ThresholdScheme, ThresholdScheme) {
    let m = Arc::new(Matroid::uniform(2, 1).unwrap());
    let inst = BernoulliInstance::new(m.clone(), vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
    let sol = solve_exante(&inst).unwrap();
    let dec = decompose(&sol.x, &m).unwrap();
    let adv = ThresholdScheme::adversarial(&inst, &sol, &dec, vec![0, 1]).unwrap();
    let ro = ThresholdScheme::random_order(&inst, &sol, &dec).unwrap();
    (inst, adv, ro)
}

#[test]
fn adversarial_examples() {
    let (_, adv, _) = pair();
    let mut rng = substream(0, 0);
    let order = ArrivalOrder::Permutation(vec![0, 1]);
    let t = adv.run(&order, ElemSet::singleton(0), &mut rng).unwrap();
    assert_eq!(t.accepted, vec![0]);
    assert_eq!((t.total, t.revenue, t.utility), (1.0, 0.5, 0.5));
    t.check(adv.matroid()).unwrap();
    let t = adv.run(&order, ElemSet::EMPTY, &mut rng).unwrap();
    assert_eq!((t.accepted.len(), t.total), (0, 0.0));
    let t = adv.run(&order, ElemSet::singleton(1), &mut rng).unwrap();
    assert_eq!((t.accepted.clone(), t.total), (vec![1], 1.0));
    assert_eq!(t, adv.run(&order, ElemSet::singleton(1), &mut rng).unwrap());
    let q = adv.exact_selection().unwrap().unwrap();
    assert_eq!(q, vec![0.5, 0.25]);
}

#[test]
fn random_order_examples() {
    let (_, _, ro) = pair();
    let mut rng = substream(0, 0);
    let t = ro.run(&ArrivalOrder::Times(vec![0.9, 0.1]), ElemSet::full(2), &mut rng).unwrap();
    assert_eq!(t.accepted, vec![1]);
    let expected = 1.0 - (-0.9f64).exp();
    assert!((t.records[0].threshold.unwrap() - expected).abs() < 1e-15);
    assert!(ro.run(&ArrivalOrder::Permutation(vec![0, 1]), ElemSet::full(2), &mut rng).is_err());

    let m = Arc::new(Matroid::uniform(1, 1).unwrap());
    let inst = BernoulliInstance::new(m.clone(), vec![1.0], vec![1.0]).unwrap();
    let sol = solve_exante(&inst).unwrap();
    let single = ThresholdScheme::random_order(&inst, &sol, &decompose(&sol.x, &m).unwrap()).unwrap();
    for t in [0.0, 0.3, 1.0] {
        let tr = single.run(&ArrivalOrder::Times(vec![t]), ElemSet::full(1), &mut rng).unwrap();
        assert_eq!(tr.total, 1.0);
    }
    assert_eq!(Schedule::Exponential.alpha(Some(1.0)), 0.0);
}

#[test]
fn magician_recursion_examples() {
    let s = MagicianState::along(&[0.5, 0.5], &[0, 1], 0.5).unwrap();
    assert_eq!(s.r, vec![1.0, 0.75, 0.5]);
    assert_eq!(s.q[0], 0.5);
    assert!((s.q[1] - 2.0 / 3.0).abs() < 1e-15);
    let s = MagicianState::along(&[0.99, 0.01], &[0, 1], 0.5).unwrap();
    assert!((s.r[1] - 0.505).abs() < 1e-15);
    assert!((s.q[1] - 0.5 / 0.505).abs() < 1e-15);
    assert!(Rank1Ocrs::new(vec![0.7, 0.7], vec![0, 1]).is_err());
}

#[test]
fn rank1_exact_selection() {
    let ocrs = Rank1Ocrs::new(vec![0.5, 0.5], vec![0, 1]).unwrap();
    assert_eq!(ocrs.exact_selection().unwrap().unwrap(), vec![0.25, 0.25]);
    let quarter = QuarterBaseline::new(vec![1.0], vec![0]).unwrap();
    assert_eq!(quarter.exact_selection().unwrap().unwrap(), vec![0.5]);
    let quarter = QuarterBaseline::new(vec![0.5, 0.5], vec![0, 1]).unwrap();
    assert_eq!(quarter.exact_selection().unwrap().unwrap()[1], 0.5 * 0.375);
    let rcrs = Rank1Rcrs::new(vec![1.0]).unwrap();
    let q = rcrs.exact_selection().unwrap().unwrap();
    assert!((q[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
}

#[test]
fn rank1_ocrs_matches_coin_integration_by_simulation() {
    let x = vec![0.2, 0.3, 0.4];
    let ocrs = Rank1Ocrs::new(x.clone(), vec![2, 0, 1]).unwrap();
    let exact = ocrs.exact_selection().unwrap().unwrap();
    let trials = 200_000u64;
    let counts = crate::rng::monte_carlo(
        trials,
        7,
        || vec![0u64; 3],
        |acc, rng, _| {
            let active = crate::instance::draw_active(&x, rng);
            let t = ocrs.run(&ArrivalOrder::Permutation(vec![2, 0, 1]), active, rng).unwrap();
            for &i in &t.accepted {
                acc[i] += 1;
            }
        },
        |a, b| a.iter_mut().zip(b).for_each(|(u, v)| *u += v),
    );
    for i in 0..3 {
        let p = counts[i] as f64 / trials as f64;
        let se = crate::rng::proportion_se(p, trials);
        assert!((p - exact[i]).abs() <= 4.0 * se, "element {i}: {p} vs {}", exact[i]);
    }
}

#[test]
fn quarter_and_greedy_never_accept_inactive() {
    let mut rng = substream(3, 0);
    let quarter = QuarterBaseline::new(vec![0.5, 0.5], vec![0, 1]).unwrap();
    let t = quarter.run(&ArrivalOrder::Permutation(vec![0, 1]), ElemSet::EMPTY, &mut rng).unwrap();
    assert!(t.accepted.is_empty());
    let m = Arc::new(Matroid::uniform(3, 2).unwrap());
    let g = GreedyScheme::new(m.clone(), vec![0.5; 3], ArrivalModel::identity(3)).unwrap();
    let t = g.run(&ArrivalOrder::Permutation(vec![0, 1, 2]), ElemSet::full(3), &mut rng).unwrap();
    assert_eq!(t.accepted, vec![0, 1]);
    t.check(&m).unwrap();
    let never = NeverAccept::new(m, vec![0.5; 3], ArrivalModel::RandomOrder).unwrap();
    assert_eq!(never.exact_selection().unwrap().unwrap(), vec![0.0; 3]);
}
