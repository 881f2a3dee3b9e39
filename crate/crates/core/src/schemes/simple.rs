use std::sync::Arc;

use super::trace::{SelectionTrace, TraceBuilder};
use super::OnlineScheme;
use crate::error::{Error, Result};
use crate::instance::{ArrivalModel, ArrivalOrder};
use crate::lpcrs::{exact_q, DeterministicPolicy, ExactOptions};
use crate::matroid::Matroid;
use crate::rng::Stream;
use crate::set::ElemSet;

/// Matroid-oblivious straw man: accepts every active element that keeps the
/// accepted set independent.
#[derive(Clone, Debug)]
pub struct GreedyScheme {
    matroid: Arc<Matroid>,
    x: Vec<f64>,
    values: Vec<f64>,
    arrival: ArrivalModel,
}

impl GreedyScheme {
    pub fn new(matroid: Arc<Matroid>, x: Vec<f64>, arrival: ArrivalModel) -> Result<Self> {
        let n = matroid.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch { what: "x", expected: n, got: x.len() });
        }
        arrival.validate(n)?;
        Ok(GreedyScheme { matroid, values: vec![1.0; n], x, arrival })
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.x.len() {
            return Err(Error::DimensionMismatch { what: "values", expected: self.x.len(), got: values.len() });
        }
        self.values = values;
        Ok(self)
    }
}

impl OnlineScheme for GreedyScheme {
    fn name(&self) -> String {
        "greedy".into()
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
        true
    }

    fn run(&self, order: &ArrivalOrder, active: ElemSet, _rng: &mut Stream) -> Result<SelectionTrace> {
        let mut trace = TraceBuilder::new(order, active);
        for k in 0..self.x.len() {
            let i = trace.sequence()[k];
            let value = if active.contains(i) { self.values[i] } else { 0.0 };
            let accept = active.contains(i) && self.matroid.independent(trace.accepted().with(i));
            trace.push(i, value, None, None, accept);
        }
        Ok(trace.finish())
    }

    fn exact_selection(&self) -> Option<Result<Vec<f64>>> {
        Some(exact_q(&DeterministicPolicy::Greedy, &self.matroid, &self.x, &self.arrival, &ExactOptions::default()))
    }
}

/// Rejects everything.
#[derive(Clone, Debug)]
pub struct NeverAccept {
    matroid: Arc<Matroid>,
    x: Vec<f64>,
    values: Vec<f64>,
    arrival: ArrivalModel,
}

impl NeverAccept {
    pub fn new(matroid: Arc<Matroid>, x: Vec<f64>, arrival: ArrivalModel) -> Result<Self> {
        let n = matroid.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch { what: "x", expected: n, got: x.len() });
        }
        arrival.validate(n)?;
        Ok(NeverAccept { matroid, values: vec![1.0; n], x, arrival })
    }
}

impl OnlineScheme for NeverAccept {
    fn name(&self) -> String {
        "never".into()
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
        true
    }

    fn run(&self, order: &ArrivalOrder, active: ElemSet, _rng: &mut Stream) -> Result<SelectionTrace> {
        let mut trace = TraceBuilder::new(order, active);
        for k in 0..self.x.len() {
            let i = trace.sequence()[k];
            let value = if active.contains(i) { self.values[i] } else { 0.0 };
            trace.push(i, value, None, None, false);
        }
        Ok(trace.finish())
    }

    fn exact_selection(&self) -> Option<Result<Vec<f64>>> {
        Some(Ok(vec![0.0; self.x.len()]))
    }
}
