use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value was evaluated outside the domain of a function or target.
    #[error("value {value} outside domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Preconditions of an analytic result do not hold.
    #[error("{0}")]
    Precondition(String),

    /// A computation would exceed its configured budget.
    #[error("resource limit exceeded: {what} (limit {limit})")]
    Resource { what: String, limit: u64 },

    #[error("incomparable pivots: {0} vs {1}")]
    IncomparablePivots(f64, f64),

    /// Malformed input row; `index` is zero-based.
    #[error("malformed input at index {index}: {message}")]
    Input { index: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
