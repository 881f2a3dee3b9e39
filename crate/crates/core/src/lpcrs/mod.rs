//! Randomized online contention resolution schemes as convex combinations of
//! deterministic policies, built by column generation against a separation
//! oracle.

mod build;
mod exact;
mod oracle;
mod policy;

pub use build::{
    build_randomized_crs, build_worst_order, execute_randomized_crs, BuildOptions, PolicyDescriptor, RandomizedOcrs,
    RandomizedOcrsFile, WorstOrderBuild,
};
pub use exact::{
    estimate_q, exact_q, exact_q_enumerate, exact_q_permutations, pattern_probability, permutations, ExactOptions,
};
pub use oracle::{best_response, guarantee, separation_oracle, DualPoint, OracleKind, OracleOutput};
pub use policy::{admissible, DeterministicPolicy, TableEntry, TablePolicy, ThresholdPolicy};
