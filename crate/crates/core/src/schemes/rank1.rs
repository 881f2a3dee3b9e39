use rand::Rng;
use serde::{Deserialize, Serialize};

use super::trace::{SelectionTrace, TraceBuilder};
use super::OnlineScheme;
use crate::error::{Error, Result};
use crate::instance::{check_permutation, ArrivalModel, ArrivalOrder};
use crate::matroid::Matroid;
use crate::rng::Stream;
use crate::set::ElemSet;

const SUM_TOL: f64 = 1e-12;

fn check_rank1_point(x: &[f64]) -> Result<()> {
    for (i, &v) in x.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("x[{i}] = {v} is not in [0,1]")));
        }
    }
    let total: f64 = x.iter().sum();
    if total > 1.0 + SUM_TOL {
        return Err(Error::SchemeMismatch(format!(
            "rank-1 schemes need Σx ≤ 1, got {total}"
        )));
    }
    Ok(())
}

fn check_values(values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::DimensionMismatch { what: "values", expected: n, got: values.len() });
    }
    Ok(())
}

/// Reach probabilities `r` (length `n + 1`) and consideration biases `q`
/// along an arrival sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagicianState {
    pub alpha: f64,
    pub r: Vec<f64>,
    pub q: Vec<f64>,
}

impl MagicianState {
    /// `r_1 = 1`, `q_k = α / r_k`, `r_{k+1} = r_k − α x_k` along `sequence`.
    pub fn along(x: &[f64], sequence: &[usize], alpha: f64) -> Result<Self> {
        let mut r = Vec::with_capacity(sequence.len() + 1);
        let mut q = Vec::with_capacity(sequence.len());
        let mut reach = 1.0;
        r.push(reach);
        for &i in sequence {
            let bias = alpha / reach;
            if !(bias <= 1.0 + SUM_TOL) {
                return Err(Error::SchemeMismatch(format!(
                    "consideration probability {bias} exceeds 1 at element {i}"
                )));
            }
            q.push(bias.min(1.0));
            reach -= alpha * x[i];
            r.push(reach);
        }
        Ok(MagicianState { alpha, r, q })
    }
}

/// Rank-1 OCRS that considers the `k`-th arrival with probability
/// `q_k = α / r_k` while nothing has been accepted, `α = 1/2`.
#[derive(Clone, Debug)]
pub struct Rank1Ocrs {
    matroid: Matroid,
    x: Vec<f64>,
    values: Vec<f64>,
    arrival: ArrivalModel,
    alpha: f64,
}

impl Rank1Ocrs {
    pub fn new(x: Vec<f64>, order: Vec<usize>) -> Result<Self> {
        check_rank1_point(&x)?;
        check_permutation(&order, x.len())?;
        let n = x.len();
        Ok(Rank1Ocrs {
            matroid: Matroid::uniform(n, 1)?,
            values: vec![1.0; n],
            x,
            arrival: ArrivalModel::Fixed(order),
            alpha: 0.5,
        })
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        check_values(&values, self.x.len())?;
        self.values = values;
        Ok(self)
    }

    pub fn state(&self) -> Result<MagicianState> {
        let ArrivalModel::Fixed(order) = &self.arrival else { unreachable!() };
        MagicianState::along(&self.x, order, self.alpha)
    }
}

impl OnlineScheme for Rank1Ocrs {
    fn name(&self) -> String {
        "rank1-ocrs".into()
    }

    fn matroid(&self) -> &Matroid {
        &self.matroid
    }

    fn marginals(&self) -> &[f64] {
        &self.x
    }

    fn values(&self) -> &[f64] {
        &self.values
    }

    fn arrival(&self) -> &ArrivalModel {
        &self.arrival
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn run(&self, order: &ArrivalOrder, active: ElemSet, rng: &mut Stream) -> Result<SelectionTrace> {
        let sequence = order.sequence();
        let state = MagicianState::along(&self.x, &sequence, self.alpha)?;
        let mut trace = TraceBuilder::new(order, active);
        for (k, &i) in sequence.iter().enumerate() {
            let value = if active.contains(i) { self.values[i] } else { 0.0 };
            let accept = trace.accepted().is_empty() && rng.gen::<f64>() < state.q[k] && active.contains(i);
            trace.push(i, value, None, None, accept);
        }
        Ok(trace.finish())
    }

    /// Integrates the consideration coins: the probability that nothing has
    /// been accepted before the `k`-th arrival is carried forward directly.
    fn exact_selection(&self) -> Option<Result<Vec<f64>>> {
        Some(self.state().map(|state| {
            let ArrivalModel::Fixed(order) = &self.arrival else { unreachable!() };
            let mut sel = vec![0.0; self.x.len()];
            let mut none_yet = 1.0;
            for (k, &i) in order.iter().enumerate() {
                let p = none_yet * state.q[k] * self.x[i];
                sel[i] = p;
                none_yet -= p;
            }
            sel
        }))
    }
}

/// Rank-1 RCRS: an active element arriving at time `t` while nothing has
/// been accepted is taken with probability `e^{−t x_i}`.
#[derive(Clone, Debug)]
pub struct Rank1Rcrs {
    matroid: Matroid,
    x: Vec<f64>,
    values: Vec<f64>,
    arrival: ArrivalModel,
}

impl Rank1Rcrs {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        check_rank1_point(&x)?;
        let n = x.len();
        Ok(Rank1Rcrs {
            matroid: Matroid::uniform(n, 1)?,
            values: vec![1.0; n],
            x,
            arrival: ArrivalModel::RandomOrder,
        })
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        check_values(&values, self.x.len())?;
        self.values = values;
        Ok(self)
    }
}

impl OnlineScheme for Rank1Rcrs {
    fn name(&self) -> String {
        "rank1-rcrs".into()
    }

    fn matroid(&self) -> &Matroid {
        &self.matroid
    }

    fn marginals(&self) -> &[f64] {
        &self.x
    }

    fn values(&self) -> &[f64] {
        &self.values
    }

    fn arrival(&self) -> &ArrivalModel {
        &self.arrival
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn run(&self, order: &ArrivalOrder, active: ElemSet, rng: &mut Stream) -> Result<SelectionTrace> {
        if !order.is_timed() {
            return Err(Error::InvalidInput("the rank-1 RCRS needs arrival times".into()));
        }
        let mut trace = TraceBuilder::new(order, active);
        for k in 0..self.x.len() {
            let i = trace.sequence()[k];
            let t = trace.time_of(i).unwrap_or(0.0);
            let value = if active.contains(i) { self.values[i] } else { 0.0 };
            let accept = trace.accepted().is_empty()
                && active.contains(i)
                && rng.gen::<f64>() < (-t * self.x[i]).exp();
            trace.push(i, value, None, None, accept);
        }
        Ok(trace.finish())
    }

    /// Nothing is accepted before time `t` with probability `e^{−t Σx}`, so
    /// `Pr[i selected] = x_i (1 − e^{−Σx}) / Σx`.
    fn exact_selection(&self) -> Option<Result<Vec<f64>>> {
        let total: f64 = self.x.iter().sum();
        let factor = if total > 0.0 { (1.0 - (-total).exp()) / total } else { 1.0 };
        Some(Ok(self.x.iter().map(|xi| xi * factor).collect()))
    }
}

/// Ignores each element with probability 1/2 and otherwise takes the first
/// active one.
#[derive(Clone, Debug)]
pub struct QuarterBaseline {
    matroid: Matroid,
    x: Vec<f64>,
    values: Vec<f64>,
    arrival: ArrivalModel,
}

impl QuarterBaseline {
    pub fn new(x: Vec<f64>, order: Vec<usize>) -> Result<Self> {
        check_rank1_point(&x)?;
        check_permutation(&order, x.len())?;
        let n = x.len();
        Ok(QuarterBaseline {
            matroid: Matroid::uniform(n, 1)?,
            values: vec![1.0; n],
            x,
            arrival: ArrivalModel::Fixed(order),
        })
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        check_values(&values, self.x.len())?;
        self.values = values;
        Ok(self)
    }
}

impl OnlineScheme for QuarterBaseline {
    fn name(&self) -> String {
        "quarter".into()
    }

    fn matroid(&self) -> &Matroid {
        &self.matroid
    }

    fn marginals(&self) -> &[f64] {
        &self.x
    }

    fn values(&self) -> &[f64] {
        &self.values
    }

    fn arrival(&self) -> &ArrivalModel {
        &self.arrival
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn run(&self, order: &ArrivalOrder, active: ElemSet, rng: &mut Stream) -> Result<SelectionTrace> {
        let mut trace = TraceBuilder::new(order, active);
        for k in 0..self.x.len() {
            let i = trace.sequence()[k];
            let ignored = rng.gen::<bool>();
            let value = if active.contains(i) { self.values[i] } else { 0.0 };
            let accept = !ignored && active.contains(i) && trace.accepted().is_empty();
            trace.push(i, value, None, None, accept);
        }
        Ok(trace.finish())
    }

    fn exact_selection(&self) -> Option<Result<Vec<f64>>> {
        let ArrivalModel::Fixed(order) = &self.arrival else { unreachable!() };
        let mut sel = vec![0.0; self.x.len()];
        let mut none_yet = 1.0;
        for &i in order {
            let p = none_yet * 0.5 * self.x[i];
            sel[i] = p;
            none_yet -= p;
        }
        Some(Ok(sel))
    }
}
