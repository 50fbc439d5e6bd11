use thiserror::Error;

/// Errors raised by the numerical routines and the experiment drivers.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum VpmError {
    /// An argument lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller combined arguments in a way the operation does not support.
    #[error("usage error: {0}")]
    Usage(String),

    /// A corpus function id could not be resolved.
    #[error("unknown function id `{0}`")]
    UnknownFunction(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl VpmError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        VpmError::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        VpmError::Usage(msg.into())
    }
}

impl From<std::io::Error> for VpmError {
    fn from(err: std::io::Error) -> Self {
        VpmError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, VpmError>;
