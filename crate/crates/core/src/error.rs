use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("difference sequence is empty; the average over differences is undefined")]
    EmptyDifferences,

    #[error("modulus {modulus} exceeds the exact-decision limit {limit}; use the heuristic search instead")]
    ExactLimitExceeded { modulus: usize, limit: usize },

    #[error("modulus {modulus} is not coprime to (k-1)! for k = {k}")]
    NotCoprime { modulus: usize, k: usize },

    #[error("embedding requires s >= 2r (got s = {s}, r = {r})")]
    SubsetSizeTooSmall { s: usize, r: usize },

    #[error("matrix dimension {dim} exceeds the configured cap {cap}")]
    DimensionCapExceeded { dim: u128, cap: usize },

    #[error("exact enumeration needs {what} <= {limit} (got {got})")]
    EnumerationLimit { what: &'static str, got: usize, limit: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no good difference sequence after {attempts} attempts (best: {best_collisions} collisions, multiplicity {best_multiplicity})")]
    GoodSetExhausted {
        attempts: usize,
        best: Vec<usize>,
        best_collisions: usize,
        best_multiplicity: usize,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
