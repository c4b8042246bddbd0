use thiserror::Error;

/// Errors raised by the model, solvers and separators.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("threshold must be positive, got {0}")]
    NonPositiveThreshold(String),

    #[error("item {index} ({label}): cost must be positive, got {value}")]
    NonPositiveCost {
        index: usize,
        label: String,
        value: String,
    },

    #[error("item {index} ({label}): profit must be nonnegative, got {value}")]
    NegativeProfit {
        index: usize,
        label: String,
        value: String,
    },

    #[error("instance is infeasible: total profit {total} is below the threshold")]
    Infeasible { total: String },

    #[error("DP needs {cells} cells, over the budget of {budget}")]
    BudgetExceeded { cells: u128, budget: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {n} items")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("instance too large for enumeration: n = {n}, limit {limit}")]
    SizeGuard { n: usize, limit: usize },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("malformed LP model: {0}")]
    MalformedModel(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
