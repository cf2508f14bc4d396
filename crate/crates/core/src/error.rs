use thiserror::Error;

/// Errors raised anywhere in the optimizer, model, or pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("evaluation budget exhausted after {performed} evaluations")]
    BudgetExhausted { performed: usize },

    #[error("problem `{problem}` produced a non-finite objective or constraint value")]
    NonFinite { problem: String },

    #[error("decision component {index} = {value} lies outside [{lower}, {upper}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("no analytic Pareto front available for `{0}`")]
    UnsupportedFront(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model capacity exceeded: {0}")]
    Capacity(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("solution set is empty (no feasible solutions)")]
    EmptySolutionSet,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
