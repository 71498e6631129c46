use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A denominator Pochhammer factor vanished while the numerator did not.
    #[error("pole: {0}")]
    Pole(String),

    /// The point or parameters fall outside what the operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input (non-finite values, bad indices, parse failures).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// No candidate form could be compared with a stable truncation.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl Error {
    pub(crate) fn pole(msg: impl Into<String>) -> Self {
        Error::Pole(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
