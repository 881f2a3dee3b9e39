//! Online selection schemes and their traces.

mod rank1;
mod simple;
mod threshold;
mod trace;

pub use rank1::{MagicianState, QuarterBaseline, Rank1Ocrs, Rank1Rcrs};
pub use simple::{GreedyScheme, NeverAccept};
pub use threshold::{Schedule, ThresholdRule, ThresholdScheme};
pub use trace::{ElementRecord, SelectionTrace, IDENTITY_TOL};

pub(crate) use trace::TraceBuilder;

use crate::error::Result;
use crate::instance::{ArrivalModel, ArrivalOrder};
use crate::matroid::Matroid;
use crate::rng::Stream;
use crate::set::ElemSet;

/// An online scheme run on a revealed activity pattern. Activity is an
/// input so that callers can enumerate patterns exactly; any internal coins
/// come from `rng`.
pub trait OnlineScheme: Send + Sync {
    fn name(&self) -> String;

    fn matroid(&self) -> &Matroid;

    /// Activation probabilities `x`.
    fn marginals(&self) -> &[f64];

    /// Decision values credited when an active element is accepted.
    fn values(&self) -> &[f64];

    fn arrival(&self) -> &ArrivalModel;

    /// True when the run does not consume `rng`.
    fn is_deterministic(&self) -> bool;

    fn run(&self, order: &ArrivalOrder, active: ElemSet, rng: &mut Stream) -> Result<SelectionTrace>;

    /// Exact `Pr[i selected]` when the scheme knows how to compute it.
    fn exact_selection(&self) -> Option<Result<Vec<f64>>> {
        None
    }

    fn n(&self) -> usize {
        self.marginals().len()
    }
}

#[cfg(test)]
mod tests;
