use thiserror::Error;

/// Errors raised by instance construction, LP solving, policies and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: wrong shapes, out-of-range values, bad indices.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A policy or operation is not usable with the given instance.
    #[error("configuration error: {0}")]
    Config(String),

    /// A runtime contract was broken, e.g. a policy chose an unaffordable action.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// An internal consistency check failed.
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// A tabulation request exceeded the size guard.
    #[error("size guard exceeded: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
