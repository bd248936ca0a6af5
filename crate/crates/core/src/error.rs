use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid field `{field}`: {msg}")]
    Field { field: String, msg: String },
    #[error("linear system is numerically singular (reciprocal condition {rcond:e})")]
    Degenerate { rcond: f64 },
    #[error("exhaustive enumeration of 2^{bits} sequences exceeds the guard of 2^{limit}")]
    BudgetGuard { bits: usize, limit: usize },
    #[error("order {k} needs {needed} initialisations for the requested miss probability, above the cap of {cap}")]
    BudgetExceeded { k: usize, needed: u64, cap: u64 },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("trajectory became non-finite at step {step}")]
    NonFinite { step: usize },
    #[error("optimisation did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetGuard { .. } | Error::BudgetExceeded { .. } => 3,
            Error::Degenerate { .. } | Error::NonFinite { .. } | Error::NoConvergence { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
