//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input is structurally valid but degenerate (e.g. an all-zero matrix);
    /// callers that can produce a meaningful zero-valued answer catch this.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A hard size cap was exceeded (explicit flattening, resource budgets).
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    /// A matrix file failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::CapacityExceeded(msg.into())
    }
}
