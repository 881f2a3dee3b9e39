use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{hat, uniform_rank1};
use super::measure::{average_selectability, estimate_selectability};
use crate::error::{Error, Result};
use crate::instance::{random_permutation, ArrivalModel};
use crate::lpcrs::{build_randomized_crs, exact_q, permutations, BuildOptions, DeterministicPolicy, ExactOptions};
use crate::matroid::Matroid;
use crate::rng::substream;
use crate::schemes::{GreedyScheme, OnlineScheme, Rank1Rcrs, ThresholdRule, ThresholdScheme};

/// All `n!` orders when `n ≤ exhaustive_cap`, otherwise `samples` seeded
/// random orders.
pub fn candidate_orders(n: usize, exhaustive_cap: usize, samples: usize, seed: u64) -> Vec<Vec<usize>> {
    if n <= exhaustive_cap {
        permutations(n)
    } else {
        (0..samples).map(|k| random_permutation(n, &mut substream(seed, k as u64))).collect()
    }
}

/// The order minimizing the exact `E[Alg] = Σ_i q_i y_i` of the adversarial
/// threshold algorithm, with that value. Ties keep the earliest order.
pub fn worst_order_adversarial(rule: &Arc<ThresholdRule>, x: &[f64], orders: &[Vec<usize>]) -> Result<(Vec<usize>, f64)> {
    let values = orders
        .par_iter()
        .map(|o| {
            let s = ThresholdScheme::from_rule(rule.clone(), x.to_vec(), ArrivalModel::Fixed(o.clone()));
            let q = exact_q(&s.policy(), rule.matroid(), x, &ArrivalModel::Fixed(o.clone()), &ExactOptions::default())?;
            Ok(q.iter().zip(rule.y()).map(|(a, b)| a * b).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (k, v) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, &v)| if v < best.1 { (k, v) } else { best });
    if orders.is_empty() {
        return Err(Error::InvalidInput("no orders to compare".into()));
    }
    Ok((orders[k].clone(), v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoElementOptimum {
    pub eps: f64,
    pub x: Vec<f64>,
    /// Optimum of the LP over all deterministic fixed-order policies.
    pub c_star: f64,
    pub ceiling: f64,
    pub lp_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rank1Ceiling {
    pub n: usize,
    /// `Pr[no element active]` as a binomial sum.
    pub p_none_exact: f64,
    /// `(1 − 1/n)^n`.
    pub p_none_analytic: f64,
    pub ceiling: f64,
    pub measured_avg: f64,
    pub measured_se: f64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub two_element: TwoElementOptimum,
    pub rank1: Vec<Rank1Ceiling>,
}

/// Rank 1, `x = (1 − ε, ε)`, fixed order: the LP optimum against `½ + ε/2`.
pub fn two_element_optimum(eps: f64) -> Result<TwoElementOptimum> {
    let x = vec![1.0 - eps, eps];
    let m = Arc::new(Matroid::uniform(2, 1)?);
    let s = build_randomized_crs(m, x.clone(), ArrivalModel::identity(2), &BuildOptions::optimum())?;
    Ok(TwoElementOptimum { eps, x, c_star: s.certified_c(), ceiling: 0.5 + eps / 2.0, lp_history: s.history().to_vec() })
}

/// `1 − Σ_{k≥1} C(n,k) p^k (1−p)^{n−k}` with `p = 1/n`.
fn p_none_by_binomial(n: usize) -> f64 {
    let p = 1.0 / n as f64;
    let mut any = 0.0;
    let mut binom = 1.0;
    for k in 1..=n {
        binom = binom * (n - k + 1) as f64 / k as f64;
        any += binom * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    }
    1.0 - any
}

pub fn rank1_ceiling(n: usize, trials: u64, seed: u64) -> Result<Rank1Ceiling> {
    let (_, x) = uniform_rank1(n)?;
    let p_none_analytic = (1.0 - 1.0 / n as f64).powi(n as i32);
    let rcrs = Rank1Rcrs::new(x)?;
    let (measured_avg, measured_se) = if trials > 0 { average_selectability(&rcrs, trials, seed)? } else { (f64::NAN, f64::NAN) };
    Ok(Rank1Ceiling {
        n,
        p_none_exact: p_none_by_binomial(n),
        p_none_analytic,
        ceiling: 1.0 - p_none_analytic,
        measured_avg,
        measured_se,
        trials,
    })
}

pub fn optimality_experiments(eps: f64, ns: &[usize], trials: u64, seed: u64) -> Result<OptimalityReport> {
    Ok(OptimalityReport {
        two_element: two_element_optimum(eps)?,
        rank1: ns.iter().map(|&n| rank1_ceiling(n, trials, seed)).collect::<Result<Vec<_>>>()?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrawManPoint {
    pub hats: usize,
    /// Exact `Pr[base edge selected] / x_base` when `n` is within the cap.
    pub exact: Option<f64>,
    pub measured: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HatReport {
    pub straw_man: Vec<StrawManPoint>,
    /// Hat count for the LP-built scheme and its certified and re-verified `c`.
    pub lp_hats: usize,
    pub lp_certified_c: f64,
    pub lp_verified_c: f64,
    /// Exact worst-order ratio of the adversarial threshold algorithm.
    pub threshold_worst_ratio: f64,
    pub threshold_worst_order: Vec<usize>,
}

/// Straw-man base-edge selectability over `hat_counts`, plus the LP-built
/// scheme and the threshold algorithm on `lp_hats` hats.
pub fn hat_regression(hat_counts: &[usize], lp_hats: usize, trials: u64, seed: u64) -> Result<HatReport> {
    let mut straw_man = Vec::new();
    for &h in hat_counts {
        let (m, x) = hat(h)?;
        let base = x.len() - 1;
        let m = Arc::new(m);
        let scheme = GreedyScheme::new(m.clone(), x.clone(), ArrivalModel::identity(x.len()))?;
        let exact = if x.len() <= ExactOptions::default().fixed_cap {
            Some(exact_q(&DeterministicPolicy::Greedy, &m, &x, scheme.arrival(), &ExactOptions::default())?[base] / x[base])
        } else {
            None
        };
        let est = estimate_selectability(&scheme, "", trials, seed)?;
        let e = &est.elements[base];
        straw_man.push(StrawManPoint { hats: h, exact, measured: e.p_select / e.x, se: e.se / e.x });
    }

    let (m, x) = hat(lp_hats)?;
    let m = Arc::new(m);
    let n = x.len();
    let arrival = ArrivalModel::identity(n);
    let lp = build_randomized_crs(m.clone(), x.clone(), arrival.clone(), &BuildOptions::for_arrival(&arrival))?;
    let verified = lp.verify_exact(&ExactOptions::default())?;
    let lp_verified_c = verified.iter().zip(&x).filter(|(_, &xi)| xi > 0.0).map(|(q, xi)| q / xi).fold(1.0, f64::min);

    let inst = super::corpus::hat_instance(lp_hats)?;
    let sol = crate::exante::solve_exante(&inst)?;
    let dec = crate::exante::decompose(&sol.x, &m)?;
    let rule = Arc::new(ThresholdRule::new(m, dec, sol.y.clone(), crate::schemes::Schedule::Half)?);
    let orders = candidate_orders(n, 6, 1000, seed);
    let (order, value) = worst_order_adversarial(&rule, &sol.x, &orders)?;
    Ok(HatReport {
        straw_man,
        lp_hats,
        lp_certified_c: lp.certified_c(),
        lp_verified_c,
        threshold_worst_ratio: value / sol.objective,
        threshold_worst_order: order,
    })
}
