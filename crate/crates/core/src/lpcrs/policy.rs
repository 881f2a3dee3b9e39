use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::instance::ArrivalOrder;
use crate::matroid::Matroid;
use crate::schemes::{ThresholdRule, TraceBuilder, SelectionTrace};
use crate::set::ElemSet;

/// Feasibility part of every policy: `B ⊆ A`, `i ∉ A`, `B + i` independent.
#[inline]
pub fn admissible(m: &Matroid, arrived: ElemSet, accepted: ElemSet, next: usize) -> bool {
    accepted.is_subset(arrived) && !arrived.contains(next) && m.independent(accepted.with(next))
}

/// The threshold rule of the ex-ante prophet algorithm used as a policy.
#[derive(Clone, Debug)]
pub struct ThresholdPolicy {
    rule: Arc<ThresholdRule>,
}

impl ThresholdPolicy {
    pub fn new(rule: Arc<ThresholdRule>) -> Self {
        ThresholdPolicy { rule }
    }

    pub fn rule(&self) -> &Arc<ThresholdRule> {
        &self.rule
    }
}

/// An explicit table of the `(arrived, accepted, next)` states that accept.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TablePolicy {
    pub accept: BTreeSet<TableEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableEntry {
    pub arrived: ElemSet,
    pub accepted: ElemSet,
    pub next: usize,
}

impl TablePolicy {
    pub fn contains(&self, arrived: ElemSet, accepted: ElemSet, next: usize) -> bool {
        self.accept.contains(&TableEntry { arrived, accepted, next })
    }
}

/// A deterministic online policy `φ(A, B, i)`: whether to select the next
/// element `i` if it is active, given the arrived set `A` and accepted set `B`.
#[derive(Clone, Debug)]
pub enum DeterministicPolicy {
    Threshold(ThresholdPolicy),
    Table(TablePolicy),
    /// Accept every feasible element.
    Greedy,
    Never,
}

impl DeterministicPolicy {
    pub fn kind(&self) -> &'static str {
        match self {
            DeterministicPolicy::Threshold(_) => "threshold",
            DeterministicPolicy::Table(_) => "table",
            DeterministicPolicy::Greedy => "greedy",
            DeterministicPolicy::Never => "never",
        }
    }

    /// `φ(A, B, i)` at arrival time `time` (only threshold policies with the
    /// exponential schedule look at the time).
    pub fn decide(&self, m: &Matroid, arrived: ElemSet, accepted: ElemSet, next: usize, time: Option<f64>) -> bool {
        if !admissible(m, arrived, accepted, next) {
            return false;
        }
        match self {
            DeterministicPolicy::Threshold(p) => p.rule.accepts(accepted, next, time),
            DeterministicPolicy::Table(t) => t.contains(arrived, accepted, next),
            DeterministicPolicy::Greedy => true,
            DeterministicPolicy::Never => false,
        }
    }

    /// The time `c` such that `φ` accepts an active `next` iff it arrives at
    /// `t > c`; 1 means never.
    pub fn cutoff(&self, m: &Matroid, arrived: ElemSet, accepted: ElemSet, next: usize) -> f64 {
        if !admissible(m, arrived, accepted, next) {
            return 1.0;
        }
        match self {
            DeterministicPolicy::Threshold(p) => p.rule.cutoff(accepted, next),
            DeterministicPolicy::Table(t) => {
                if t.contains(arrived, accepted, next) {
                    0.0
                } else {
                    1.0
                }
            }
            DeterministicPolicy::Greedy => 0.0,
            DeterministicPolicy::Never => 1.0,
        }
    }

    /// Runs the policy online on a revealed activity pattern. The trace
    /// credits unit value to accepted elements unless `values` is given.
    pub fn run(&self, m: &Matroid, order: &ArrivalOrder, active: ElemSet, values: Option<&[f64]>) -> SelectionTrace {
        let mut trace = TraceBuilder::new(order, active);
        let mut arrived = ElemSet::EMPTY;
        for k in 0..order.n() {
            let i = trace.sequence()[k];
            let value = if active.contains(i) { values.map_or(1.0, |v| v[i]) } else { 0.0 };
            let accept = active.contains(i) && self.decide(m, arrived, trace.accepted(), i, trace.time_of(i));
            trace.push(i, value, None, None, accept);
            arrived.insert(i);
        }
        trace.finish()
    }

    /// Accepted set only, without building a trace.
    pub fn select(&self, m: &Matroid, sequence: &[usize], times: Option<&[f64]>, active: ElemSet) -> ElemSet {
        let mut arrived = ElemSet::EMPTY;
        let mut accepted = ElemSet::EMPTY;
        for &i in sequence {
            if active.contains(i) && self.decide(m, arrived, accepted, i, times.map(|t| t[i])) {
                accepted.insert(i);
            }
            arrived.insert(i);
        }
        accepted
    }
}
