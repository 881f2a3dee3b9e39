pub mod error;
pub mod exante;
pub mod harness;
pub mod instance;
pub mod lp;
pub mod lpcrs;
pub mod matroid;
pub mod rng;
pub mod schemes;
pub mod set;

pub use error::{Error, Result};
pub use instance::{ArrivalModel, ArrivalOrder, BernoulliInstance, DiscreteDist, GeneralInstance, QuantileRule};
pub use matroid::{Contraction, Matroid, MatroidSpec};
pub use set::ElemSet;
