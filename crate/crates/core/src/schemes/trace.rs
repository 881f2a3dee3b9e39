use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::ArrivalOrder;
use crate::matroid::Matroid;
use crate::set::ElemSet;

/// Relative tolerance for `total = revenue + utility` under floating point.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub element: usize,
    pub position: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub active: bool,
    /// Decision value: `y_i` if active, else 0.
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Standard error of the threshold when base prices are estimated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_se: Option<f64>,
    pub accepted: bool,
}

/// One run of an online scheme on a revealed activity pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub order: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    pub active: ElemSet,
    /// Records in arrival order.
    pub records: Vec<ElementRecord>,
    /// Accepted elements in acceptance order.
    pub accepted: Vec<usize>,
    pub revenue: f64,
    pub utility: f64,
    pub total: f64,
}

impl SelectionTrace {
    pub fn accepted_set(&self) -> ElemSet {
        self.accepted.iter().collect()
    }

    /// Checks prefix independence, the revenue/utility identity and that
    /// every acceptance was of an active element strictly above its threshold.
    pub fn check(&self, m: &Matroid) -> Result<()> {
        let mut prefix = ElemSet::EMPTY;
        for &e in &self.accepted {
            prefix.insert(e);
            if !m.is_independent(prefix)? {
                return Err(Error::InvalidInput(format!("accepted prefix {prefix} is dependent")));
            }
        }
        let scale = self.total.abs().max(1.0);
        if (self.total - (self.revenue + self.utility)).abs() > IDENTITY_TOL * scale {
            return Err(Error::InvalidInput(format!(
                "total {} differs from revenue {} + utility {}",
                self.total, self.revenue, self.utility
            )));
        }
        for r in self.records.iter().filter(|r| r.accepted) {
            if !r.active {
                return Err(Error::InvalidInput(format!("inactive element {} accepted", r.element)));
            }
            if let Some(t) = r.threshold {
                if r.value <= t {
                    return Err(Error::InvalidInput(format!(
                        "element {} accepted with value {} not above threshold {t}",
                        r.element, r.value
                    )));
                }
            }
        }
        Ok(())
    }
}

pub(crate) struct TraceBuilder {
    order: Vec<usize>,
    times: Option<Vec<f64>>,
    active: ElemSet,
    records: Vec<ElementRecord>,
    accepted: Vec<usize>,
    accepted_set: ElemSet,
}

impl TraceBuilder {
    pub fn new(order: &ArrivalOrder, active: ElemSet) -> Self {
        let times = match order {
            ArrivalOrder::Times(t) => Some(t.clone()),
            ArrivalOrder::Permutation(_) => None,
        };
        TraceBuilder {
            order: order.sequence(),
            times,
            active,
            records: Vec::with_capacity(order.n()),
            accepted: Vec::new(),
            accepted_set: ElemSet::EMPTY,
        }
    }

    pub fn sequence(&self) -> &[usize] {
        &self.order
    }

    pub fn time_of(&self, i: usize) -> Option<f64> {
        self.times.as_ref().map(|t| t[i])
    }

    pub fn accepted(&self) -> ElemSet {
        self.accepted_set
    }

    pub fn push(&mut self, element: usize, value: f64, threshold: Option<f64>, threshold_se: Option<f64>, accepted: bool) {
        let position = self.records.len();
        self.records.push(ElementRecord {
            element,
            position,
            time: self.time_of(element),
            active: self.active.contains(element),
            value,
            threshold,
            threshold_se,
            accepted,
        });
        if accepted {
            self.accepted.push(element);
            self.accepted_set.insert(element);
        }
    }

    pub fn finish(self) -> SelectionTrace {
        let mut revenue = 0.0;
        let mut utility = 0.0;
        let mut total = 0.0;
        for r in self.records.iter().filter(|r| r.accepted) {
            let t = r.threshold.unwrap_or(0.0);
            revenue += t;
            utility += (r.value - t).max(0.0);
            total += r.value;
        }
        SelectionTrace {
            order: self.order,
            times: self.times,
            active: self.active,
            records: self.records,
            accepted: self.accepted,
            revenue,
            utility,
            total,
        }
    }
}
