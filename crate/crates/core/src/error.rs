use thiserror::Error;

#[derive(Debug, Error)]
pub enum SrgmError {
    #[error("invalid probability for {what}: {value}")]
    InvalidProbability { what: &'static str, value: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("self pair ({i},{i}) has no link probability")]
    InvalidPair { i: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure at iteration {iter}: {detail}")]
    NumericalFailure { iter: usize, detail: String },

    #[error("matrix is not positive definite at pivot {pivot} (value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is ill-conditioned at pivot {pivot}: condition number {cond:e} exceeds {limit:e}")]
    IllConditioned { pivot: usize, cond: f64, limit: f64 },

    #[error("fit did not converge (kkt residual {kkt:e} after {iters} iterations)")]
    NotConverged { kkt: f64, iters: usize },

    #[error("no subcritical fixed point: lambda = {lambda} must exceed 1")]
    NoSubcriticalSolution { lambda: f64 },

    #[error("empty regularization path")]
    EmptyPath,

    #[error("path point {index} (lambda = {lambda}): {source}")]
    Path {
        index: usize,
        lambda: f64,
        #[source]
        source: Box<SrgmError>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SrgmError>;

impl SrgmError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        SrgmError::Parse {
            line,
            message: message.into(),
        }
    }
}
