use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element} is outside the ground set of size {n}")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("ground set of size {0} exceeds the supported maximum of 64 elements")]
    GroundSetTooLarge(usize),

    #[error("invalid matroid: {0}")]
    InvalidMatroid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    /// The point is not in the matroid polytope (or the tolerance is too tight).
    #[error("decomposition failed after {columns} columns: residual {residual:.3e}")]
    DecompositionFailed { residual: f64, columns: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("n = {n} exceeds the exact enumeration cap of {cap}; use Monte Carlo estimation")]
    EnumerationCap { n: usize, cap: usize },

    #[error("scheme is incompatible with the instance: {0}")]
    SchemeMismatch(String),

    #[error("cutting-plane loop reached {iterations} iterations without converging (best c = {best_c:.6})")]
    BuildDidNotConverge { iterations: usize, best_c: f64 },

    /// A separation oracle returned a policy below its proven guarantee.
    #[error("separation oracle value {value} is below the guaranteed {bound}")]
    GuaranteeViolated { value: f64, bound: f64 },

    #[error("linear program: {0}")]
    Lp(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
