use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::exact::{exact_q, ExactOptions};
use super::policy::{admissible, DeterministicPolicy, TableEntry, TablePolicy, ThresholdPolicy};
use crate::error::{Error, Result};
use crate::exante::{decompose, solve_exante};
use crate::instance::{ArrivalModel, BernoulliInstance};
use crate::matroid::Matroid;
use crate::schemes::{Schedule, ThresholdRule};
use crate::set::ElemSet;

pub const DUAL_NORM_TOL: f64 = 1e-10;
/// Slack on the guaranteed oracle value.
pub const SOUNDNESS_TOL: f64 = 1e-9;

/// Dual prices `y ≥ 0` with `Σ x_i y_i = 1`, and the dual objective `μ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub y: Vec<f64>,
    pub mu: f64,
}

impl DualPoint {
    pub fn new(y: Vec<f64>, mu: f64, x: &[f64]) -> Result<Self> {
        if y.len() != x.len() {
            return Err(Error::DimensionMismatch { what: "y", expected: x.len(), got: y.len() });
        }
        if let Some(v) = y.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidInput(format!("dual price {v} is negative")));
        }
        let s: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        if (s - 1.0).abs() > DUAL_NORM_TOL {
            return Err(Error::InvalidInput(format!("Σ x_i y_i = {s}, expected 1")));
        }
        Ok(DualPoint { y, mu })
    }

    /// Clips to `y ≥ 0` on the support of `x`, rescales to `Σ x_i y_i = 1`,
    /// and falls back to the uniform point `1/Σx` when nothing is left.
    pub fn normalized(raw: &[f64], x: &[f64], mu: f64) -> Self {
        let mut y: Vec<f64> = raw.iter().zip(x).map(|(&v, &xi)| if xi > 0.0 { v.max(0.0) } else { 0.0 }).collect();
        let s: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        if s > 1e-12 {
            y.iter_mut().for_each(|v| *v /= s);
        } else {
            y = uniform_dual(x);
        }
        DualPoint { y, mu }
    }

    pub fn uniform(x: &[f64]) -> Self {
        DualPoint { y: uniform_dual(x), mu: f64::NEG_INFINITY }
    }
}

fn uniform_dual(x: &[f64]) -> Vec<f64> {
    let total: f64 = x.iter().sum();
    x.iter().map(|&xi| if xi > 0.0 && total > 0.0 { 1.0 / total } else { 0.0 }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// The threshold prophet algorithm on the instance "value `y_i` with
    /// probability `x_i`". Guarantees `½` (fixed order) or `1 − 1/e`.
    Threshold,
    /// An optimal deterministic policy by dynamic programming over states.
    BestResponse,
}

#[derive(Clone, Debug)]
pub struct OracleOutput {
    pub policy: DeterministicPolicy,
    pub q: Vec<f64>,
    /// `Σ_i q_i y_i`.
    pub value: f64,
}

/// The constant the threshold oracle is guaranteed to reach.
pub fn guarantee(arrival: &ArrivalModel) -> f64 {
    match arrival {
        ArrivalModel::Fixed(_) => 0.5,
        ArrivalModel::RandomOrder => 1.0 - (-1.0f64).exp(),
    }
}

/// A policy `φ` with large `Σ_i q_{i,φ} y_i`.
pub fn separation_oracle(
    dual: &DualPoint,
    matroid: &Arc<Matroid>,
    x: &[f64],
    arrival: &ArrivalModel,
    kind: OracleKind,
    opts: &ExactOptions,
) -> Result<OracleOutput> {
    if dual.y.len() != x.len() {
        return Err(Error::DimensionMismatch { what: "y", expected: x.len(), got: dual.y.len() });
    }
    let policy = match kind {
        OracleKind::Threshold => threshold_policy(&dual.y, matroid, x, arrival)?,
        OracleKind::BestResponse => best_response(&dual.y, matroid, x, arrival, opts)?,
    };
    let q = exact_q(&policy, matroid, x, arrival, opts)?;
    let value: f64 = q.iter().zip(&dual.y).map(|(a, b)| a * b).sum();
    let bound = guarantee(arrival) * x.iter().zip(&dual.y).map(|(a, b)| a * b).sum::<f64>();
    if value < bound - SOUNDNESS_TOL {
        return Err(Error::GuaranteeViolated { value, bound });
    }
    Ok(OracleOutput { policy, q, value })
}

fn threshold_policy(y: &[f64], matroid: &Arc<Matroid>, x: &[f64], arrival: &ArrivalModel) -> Result<DeterministicPolicy> {
    let inst = BernoulliInstance::new(matroid.clone(), x.to_vec(), y.to_vec())?;
    let sol = solve_exante(&inst)?;
    let dec = decompose(&sol.x, matroid)?;
    let schedule = if arrival.is_random() { Schedule::Exponential } else { Schedule::Half };
    let rule = ThresholdRule::new(matroid.clone(), dec, sol.y, schedule)?;
    Ok(DeterministicPolicy::Threshold(ThresholdPolicy::new(Arc::new(rule))))
}

/// Maximizes `Σ_i q_i y_i` over deterministic policies. Fixed order: backward
/// induction over (position, accepted set). Random order: over (arrived set,
/// accepted set) with the next arrival uniform among the rest. Ties reject.
pub fn best_response(
    y: &[f64],
    matroid: &Matroid,
    x: &[f64],
    arrival: &ArrivalModel,
    opts: &ExactOptions,
) -> Result<DeterministicPolicy> {
    let n = matroid.n();
    let cap = if arrival.is_random() { opts.random_cap } else { opts.fixed_cap };
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    arrival.validate(n)?;
    let mut dp = BestResponse { m: matroid, x, y, order: None, memo: HashMap::new(), table: TablePolicy::default() };
    if let ArrivalModel::Fixed(order) = arrival {
        dp.order = Some(order.as_slice());
    }
    dp.value(ElemSet::EMPTY, ElemSet::EMPTY);
    Ok(DeterministicPolicy::Table(dp.table))
}

struct BestResponse<'a> {
    m: &'a Matroid,
    x: &'a [f64],
    y: &'a [f64],
    order: Option<&'a [usize]>,
    memo: HashMap<(ElemSet, ElemSet), f64>,
    table: TablePolicy,
}

impl BestResponse<'_> {
    fn value(&mut self, arrived: ElemSet, accepted: ElemSet) -> f64 {
        if let Some(&v) = self.memo.get(&(arrived, accepted)) {
            return v;
        }
        let n = self.x.len();
        let v = if arrived.len() == n {
            0.0
        } else if let Some(order) = self.order {
            self.branch(arrived, accepted, order[arrived.len()])
        } else {
            let rest = ElemSet::full(n).difference(arrived);
            let total: f64 = rest.iter().map(|i| self.branch(arrived, accepted, i)).sum();
            total / rest.len() as f64
        };
        self.memo.insert((arrived, accepted), v);
        v
    }

    fn branch(&mut self, arrived: ElemSet, accepted: ElemSet, i: usize) -> f64 {
        let skip = self.value(arrived.with(i), accepted);
        let xi = self.x[i];
        if xi <= 0.0 || !admissible(self.m, arrived, accepted, i) {
            return skip;
        }
        let take = self.y[i] + self.value(arrived.with(i), accepted.with(i));
        if take > skip {
            self.table.accept.insert(TableEntry { arrived, accepted, next: i });
            xi * take + (1.0 - xi) * skip
        } else {
            skip
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank1(n: usize) -> Arc<Matroid> {
        Arc::new(Matroid::uniform(n, 1).unwrap())
    }

    #[test]
    fn threshold_oracle_examples() {
        let opts = ExactOptions::default();
        let fixed2 = ArrivalModel::identity(2);
        let out = separation_oracle(&DualPoint::new(vec![1.0, 1.0], 0.0, &[0.5, 0.5]).unwrap(), &rank1(2), &[0.5, 0.5], &fixed2, OracleKind::Threshold, &opts)
            .unwrap();
        assert!((out.value - 0.75).abs() < 1e-12);
        assert_eq!(out.q, vec![0.5, 0.25]);

        let out = separation_oracle(&DualPoint::new(vec![1.0], 0.0, &[1.0]).unwrap(), &rank1(1), &[1.0], &ArrivalModel::identity(1), OracleKind::Threshold, &opts)
            .unwrap();
        assert!((out.value - 1.0).abs() < 1e-12);

        let out = separation_oracle(&DualPoint::new(vec![2.0, 0.0], 0.0, &[0.5, 0.5]).unwrap(), &rank1(2), &[0.5, 0.5], &fixed2, OracleKind::Threshold, &opts)
            .unwrap();
        assert!((out.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn best_response_dominates_threshold() {
        let m = Arc::new(Matroid::graphic(4, vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 0)]).unwrap());
        let x = [0.4, 0.3, 0.5, 0.6, 0.2];
        let dual = DualPoint::normalized(&[1.0, 3.0, 0.5, 2.0, 1.5], &x, 0.0);
        let opts = ExactOptions::default();
        for arrival in [ArrivalModel::Fixed(vec![3, 1, 4, 0, 2]), ArrivalModel::RandomOrder] {
            let t = separation_oracle(&dual, &m, &x, &arrival, OracleKind::Threshold, &opts).unwrap();
            let b = separation_oracle(&dual, &m, &x, &arrival, OracleKind::BestResponse, &opts).unwrap();
            assert!(b.value >= t.value - 1e-12, "{} < {}", b.value, t.value);
        }
    }

    #[test]
    fn normalization_falls_back_to_uniform() {
        let d = DualPoint::normalized(&[-1.0, 0.0, 0.0], &[0.5, 0.25, 0.0], 0.0);
        assert_eq!(d.y, vec![1.0 / 0.75, 1.0 / 0.75, 0.0]);
        let d = DualPoint::normalized(&[2.0, 1.0, 7.0], &[0.5, 0.5, 0.0], 0.0);
        assert_eq!(d.y, vec![4.0 / 3.0, 2.0 / 3.0, 0.0]);
    }
}
