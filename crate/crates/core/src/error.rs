use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on the caller's input does not hold.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Quadrature could not reach the requested tolerance within its panel budget.
    #[error("accuracy failure: requested {requested:e}, achieved estimate {achieved:e}")]
    AccuracyFailure { requested: f64, achieved: f64 },

    /// A configured size cap would be exceeded.
    #[error("resource limit: {what} needs {needed}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    /// The computational domain is too small for the requested time.
    #[error("truncation: need a margin of {required} sites/nodes, only {available} available")]
    Truncation { required: usize, available: usize },

    /// A linear-algebra kernel reported failure.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
