use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::trace::{SelectionTrace, TraceBuilder};
use super::OnlineScheme;
use crate::error::{Error, Result};
use crate::exante::{BasePriceCache, Decomposition, ExAnteSolution};
use crate::instance::{ArrivalModel, ArrivalOrder, BernoulliInstance};
use crate::lpcrs::{exact_q, DeterministicPolicy, ExactOptions, ThresholdPolicy};
use crate::matroid::Matroid;
use crate::rng::Stream;
use crate::set::ElemSet;

/// Threshold multiplier `α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `α = 1/2`.
    Half,
    /// `α(t) = 1 − e^{t−1}`.
    Exponential,
}

impl Schedule {
    pub fn alpha(self, t: Option<f64>) -> f64 {
        match self {
            Schedule::Half => 0.5,
            Schedule::Exponential => 1.0 - (t.unwrap_or(0.0) - 1.0).exp(),
        }
    }
}

/// Accept `i` iff it is feasible and `y_i > α · b_i(A)` for the current
/// accepted set `A`.
#[derive(Debug)]
pub struct ThresholdRule {
    prices: BasePriceCache,
    schedule: Schedule,
}

impl ThresholdRule {
    pub fn new(matroid: Arc<Matroid>, dec: Decomposition, y: Vec<f64>, schedule: Schedule) -> Result<Self> {
        if y.len() != matroid.n() {
            return Err(Error::DimensionMismatch { what: "y", expected: matroid.n(), got: y.len() });
        }
        Ok(ThresholdRule { prices: BasePriceCache::new(matroid, dec, y), schedule })
    }

    pub fn with_prices(prices: BasePriceCache, schedule: Schedule) -> Self {
        ThresholdRule { prices, schedule }
    }

    pub fn matroid(&self) -> &Arc<Matroid> {
        self.prices.matroid()
    }

    pub fn y(&self) -> &[f64] {
        self.prices.y()
    }

    pub fn decomposition(&self) -> &Decomposition {
        self.prices.decomposition()
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    pub fn prices(&self) -> &BasePriceCache {
        &self.prices
    }

    /// `(T_i, standard error of T_i)` against accepted set `a` at time `t`.
    pub fn threshold(&self, a: ElemSet, i: usize, t: Option<f64>) -> (f64, Option<f64>) {
        let table = self.prices.table(a);
        let alpha = self.schedule.alpha(t);
        (alpha * table.prices[i], table.se.as_ref().map(|se| alpha * se[i]))
    }

    pub fn feasible(&self, a: ElemSet, i: usize) -> bool {
        !a.contains(i) && self.matroid().independent(a.with(i))
    }

    /// Whether an active `i` would be accepted.
    pub fn accepts(&self, a: ElemSet, i: usize, t: Option<f64>) -> bool {
        self.feasible(a, i) && self.y()[i] > self.threshold(a, i, t).0
    }

    /// The time `c` such that an active `i` is accepted iff it arrives at
    /// `t > c`; 1 means never. Exact for both schedules.
    pub fn cutoff(&self, a: ElemSet, i: usize) -> f64 {
        let y = self.y()[i];
        if !self.feasible(a, i) || y <= 0.0 {
            return 1.0;
        }
        let b = self.prices.price(a, i);
        match self.schedule {
            Schedule::Half => {
                if y > 0.5 * b {
                    0.0
                } else {
                    1.0
                }
            }
            Schedule::Exponential => {
                if b <= 0.0 {
                    return 0.0;
                }
                let rho = y / b;
                if rho >= 1.0 {
                    0.0
                } else {
                    (1.0 + (1.0 - rho).ln()).max(0.0)
                }
            }
        }
    }
}

/// The ex-ante prophet algorithm: adversarial order with `α = 1/2`, or
/// random order with `α(t) = 1 − e^{t−1}`.
#[derive(Clone, Debug)]
pub struct ThresholdScheme {
    rule: Arc<ThresholdRule>,
    x: Vec<f64>,
    arrival: ArrivalModel,
}

impl ThresholdScheme {
    /// Fixed-order algorithm with thresholds `b_i(A)/2`.
    pub fn adversarial(inst: &BernoulliInstance, sol: &ExAnteSolution, dec: &Decomposition, order: Vec<usize>) -> Result<Self> {
        Self::build(inst, sol, dec, ArrivalModel::Fixed(order), Schedule::Half)
    }

    /// Random-order algorithm with thresholds `(1 − e^{t−1}) b_i(A_t)`.
    pub fn random_order(inst: &BernoulliInstance, sol: &ExAnteSolution, dec: &Decomposition) -> Result<Self> {
        Self::build(inst, sol, dec, ArrivalModel::RandomOrder, Schedule::Exponential)
    }

    fn build(
        inst: &BernoulliInstance,
        sol: &ExAnteSolution,
        dec: &Decomposition,
        arrival: ArrivalModel,
        schedule: Schedule,
    ) -> Result<Self> {
        let n = inst.n();
        arrival.validate(n)?;
        if sol.x.len() != n {
            return Err(Error::DimensionMismatch { what: "x", expected: n, got: sol.x.len() });
        }
        let rule = ThresholdRule::new(inst.matroid.clone(), dec.clone(), sol.y.clone(), schedule)?;
        Ok(ThresholdScheme { rule: Arc::new(rule), x: sol.x.clone(), arrival })
    }

    pub fn from_rule(rule: Arc<ThresholdRule>, x: Vec<f64>, arrival: ArrivalModel) -> Self {
        ThresholdScheme { rule, x, arrival }
    }

    pub fn rule(&self) -> &Arc<ThresholdRule> {
        &self.rule
    }

    pub fn policy(&self) -> DeterministicPolicy {
        DeterministicPolicy::Threshold(ThresholdPolicy::new(self.rule.clone()))
    }
}

impl OnlineScheme for ThresholdScheme {
    fn name(&self) -> String {
        match self.rule.schedule() {
            Schedule::Half => "adversarial".into(),
            Schedule::Exponential => "random-order".into(),
        }
    }

    fn matroid(&self) -> &Matroid {
        self.rule.matroid()
    }

    fn marginals(&self) -> &[f64] {
        &self.x
    }

    fn values(&self) -> &[f64] {
        self.rule.y()
    }

    fn arrival(&self) -> &ArrivalModel {
        &self.arrival
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn run(&self, order: &ArrivalOrder, active: ElemSet, _rng: &mut Stream) -> Result<SelectionTrace> {
        if self.rule.schedule() == Schedule::Exponential && !order.is_timed() {
            return Err(Error::InvalidInput("random-order thresholds need arrival times".into()));
        }
        let y = self.rule.y();
        if order.n() != y.len() {
            return Err(Error::DimensionMismatch { what: "arrival order", expected: y.len(), got: order.n() });
        }
        let mut trace = TraceBuilder::new(order, active);
        for k in 0..y.len() {
            let i = trace.sequence()[k];
            let a = trace.accepted();
            let value = if active.contains(i) { y[i] } else { 0.0 };
            if active.contains(i) && self.rule.feasible(a, i) {
                let (t, se) = self.rule.threshold(a, i, trace.time_of(i));
                trace.push(i, value, Some(t), se, value > t);
            } else {
                trace.push(i, value, None, None, false);
            }
        }
        Ok(trace.finish())
    }

    fn exact_selection(&self) -> Option<Result<Vec<f64>>> {
        Some(exact_q(&self.policy(), self.matroid(), &self.x, &self.arrival, &ExactOptions::default()))
    }
}
