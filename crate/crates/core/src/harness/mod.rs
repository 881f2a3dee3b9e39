//! Verification engine: exact and Monte Carlo selectability, prophet ratios,
//! brute-force oracles, the optimality experiments and the Hat regression.

pub mod corpus;
mod experiments;
mod invariants;
mod measure;
mod offline;
mod report;

pub use experiments::{
    candidate_orders, hat_regression, optimality_experiments, rank1_ceiling, two_element_optimum, worst_order_adversarial,
    HatReport, OptimalityReport, Rank1Ceiling, StrawManPoint, TwoElementOptimum,
};
pub use invariants::{check_base_price_bound, PriceBoundCheck};
pub use measure::{
    average_selectability, collect_traces, enumerate_selection, estimate_selectability, exact_selectability, exact_value,
    measure_ratio, measure_ratio_general, GeneralRatioReport, FIXED_CAP, RANDOM_CAP,
};
pub use offline::{brute_force_offline, brute_force_offline_with_cap, OFFLINE_CAP};
pub use report::{ElementSelectability, Mode, RatioReport, SelectabilityReport};

#[cfg(test)]
mod tests;
