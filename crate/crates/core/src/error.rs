use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the caller's input was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A Monte Carlo check collected too few conditioned samples to decide.
    #[error("inconclusive: {hits} conditioned samples collected, {required} required")]
    Inconclusive { hits: usize, required: usize },

    /// A numerical routine failed to reach its target accuracy.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
