use thiserror::Error;

/// Errors raised by the learners, domains and metrics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Vectors exchanged in one run must share a dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A NaN or infinite coordinate was passed where finite input is required.
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    /// Caller supplied arguments outside an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// Invalid construction parameters (domains, constants, thresholds).
    #[error("configuration error: {0}")]
    Config(String),

    /// A component broke a contract it promised to its caller, for example an
    /// inner algorithm returning a point outside the surrogate ball, or a
    /// feedback loss outside `[-1/2, 1/2]` because `G` or `D` was set too small.
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
