use std::sync::Arc;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use ocrs::exante::{decompose, in_matroid_polytope, solve_exante};
use ocrs::harness::brute_force_offline;
use ocrs::harness::corpus::{random_bernoulli, random_binary, random_matroid, random_point};
use ocrs::lp::{LinearProgram, LpOutcome, Relation};
use ocrs::rng::substream;
use ocrs::{BernoulliInstance, ElemSet, Matroid};
use proptest::prelude::*;

/// max Σ x_i y_i s.t. Σ_{i∈S} x_i ≤ r(S) for every S, 0 ≤ x ≤ p.
fn exante_by_minilp(inst: &BernoulliInstance) -> f64 {
    let m = &inst.matroid;
    let mut pb = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..inst.n()).map(|i| pb.add_var(inst.y[i], (0.0, inst.p[i]))).collect();
    for s in m.ground().subsets().filter(|s| !s.is_empty()) {
        let terms: Vec<_> = s.iter().map(|i| (vars[i], 1.0)).collect();
        pb.add_constraint(&terms, ComparisonOp::Le, m.rank(s).unwrap() as f64);
    }
    pb.solve().unwrap().objective()
}

#[test]
fn greedy_matches_lp_on_binary_matroids() {
    let mut rng = substream(21, 0);
    for _ in 0..25 {
        let n = 3 + (rand::Rng::gen_range(&mut rng, 0..4));
        let m = Arc::new(random_binary(n, 3, &mut rng).unwrap());
        let inst = random_bernoulli(m.clone(), &mut rng).unwrap();
        let sol = solve_exante(&inst).unwrap();
        let lp = exante_by_minilp(&inst);
        assert!((sol.objective - lp).abs() < 1e-9, "{} vs {lp}", sol.objective);
        let dec = decompose(&sol.x, &m).unwrap();
        assert!(dec.residual(&sol.x) <= 1e-8);
        assert!(sol.objective >= brute_force_offline(&inst).unwrap() - 1e-9);
    }
}

#[test]
fn own_simplex_agrees_with_minilp() {
    let mut rng = substream(22, 0);
    for _ in 0..40 {
        let nv = 4;
        let obj: Vec<f64> = (0..nv).map(|_| rand::Rng::gen_range(&mut rng, -2.0..2.0)).collect();
        let mut ours = LinearProgram::new(obj.clone());
        let mut pb = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = obj.iter().map(|&c| pb.add_var(c, (0.0, f64::INFINITY))).collect();
        for _ in 0..5 {
            let row: Vec<f64> = (0..nv).map(|_| rand::Rng::gen_range(&mut rng, 0.0..3.0)).collect();
            let rhs = rand::Rng::gen_range(&mut rng, 1.0..5.0);
            pb.add_constraint(&vars.iter().zip(&row).map(|(v, c)| (*v, *c)).collect::<Vec<_>>(), ComparisonOp::Le, rhs);
            ours.push(row, Relation::Le, rhs);
        }
        let sum: Vec<f64> = vec![1.0; nv];
        pb.add_constraint(&vars.iter().map(|v| (*v, 1.0)).collect::<Vec<_>>(), ComparisonOp::Ge, 0.5);
        ours.push(sum, Relation::Ge, 0.5);
        let theirs = pb.solve().map(|s| s.objective());
        match (ours.solve().unwrap(), theirs) {
            (LpOutcome::Optimal(s), Ok(t)) => assert!((s.objective - t).abs() < 1e-7, "{} vs {t}", s.objective),
            (LpOutcome::Infeasible { .. }, Err(_)) => {}
            (a, b) => panic!("disagreement: {a:?} vs {b:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_reproduces_random_points(seed in 0u64..1_000_000, n in 2usize..9, kind in 0usize..2) {
        let mut rng = substream(seed, 0);
        let m = random_matroid(kind, n, &mut rng).unwrap();
        let x = random_point(&m, &mut rng);
        let dec = decompose(&x, &m).unwrap();
        prop_assert!(dec.residual(&x) <= 1e-8);
        prop_assert!((dec.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
        for s in &dec.sets {
            prop_assert!(m.independent(*s));
        }
    }

    #[test]
    fn polytope_membership_matches_rank_inequalities(seed in 0u64..1_000_000, n in 2usize..7) {
        let mut rng = substream(seed, 1);
        let m = random_matroid(seed as usize, n, &mut rng).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, 0.0..1.0)).collect();
        let direct = m.ground().subsets().all(|s: ElemSet| s.iter().map(|i| x[i]).sum::<f64>() <= m.rank_of(s) as f64 + 1e-9);
        prop_assert_eq!(in_matroid_polytope(&m, &x, 1e-9).unwrap(), direct);
    }

    #[test]
    fn exante_is_feasible_and_dominates_offline(seed in 0u64..1_000_000, n in 2usize..9) {
        let mut rng = substream(seed, 2);
        let m = Arc::new(random_matroid(seed as usize, n, &mut rng).unwrap());
        let inst = random_bernoulli(m.clone(), &mut rng).unwrap();
        let sol = solve_exante(&inst).unwrap();
        prop_assert!(sol.x.iter().zip(&inst.p).all(|(x, p)| *x <= p + 1e-12 && *x >= 0.0));
        prop_assert!(in_matroid_polytope(&m, &sol.x, 1e-9).unwrap());
        prop_assert!(sol.objective >= brute_force_offline(&inst).unwrap() - 1e-9);
    }
}

#[test]
fn uniform_matroid_closed_form() {
    // rank k uniform: take the k largest y at full p when Σp ≤ k is not binding
    let m = Arc::new(Matroid::uniform(4, 2).unwrap());
    let inst = BernoulliInstance::new(m, vec![1.0, 1.0, 1.0, 1.0], vec![4.0, 3.0, 2.0, 1.0]).unwrap();
    assert!((solve_exante(&inst).unwrap().objective - 7.0).abs() < 1e-12);
}
