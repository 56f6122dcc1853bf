use thiserror::Error;

/// Errors raised by the tensor-field toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Matrix exponential would overflow an `f64`.
    #[error("range error: eigenvalue {0} is too large to exponentiate")]
    Range(f64),

    /// A logarithm was requested of a matrix that is not positive definite.
    #[error("domain error: eigenvalue {0} is not positive; project the matrix first")]
    Domain(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank-deficient design matrix for direction set {0}")]
    RankDeficient(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("line search failed after {backtracks} backtracks at iteration {iteration} (objective {objective:e}); the regularization weight is probably ill-scaled")]
    LineSearch {
        iteration: usize,
        backtracks: usize,
        objective: f64,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
