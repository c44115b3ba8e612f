use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The input violates a structural requirement (parity, positivity, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Inversion was asked to recover content at a degree where it carries no information.
    #[error("ill-posed input: {0}")]
    IllPosed(String),
}

pub type Result<T> = std::result::Result<T, SpinError>;

pub(crate) fn invalid_argument(msg: impl Into<String>) -> SpinError {
    SpinError::InvalidArgument(msg.into())
}

pub(crate) fn invalid_input(msg: impl Into<String>) -> SpinError {
    SpinError::InvalidInput(msg.into())
}
