use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Arguments are inconsistent with each other (sizes, counts).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A well or configuration violates a structural hypothesis.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// A numerical procedure did not reach the requested accuracy.
    #[error("accuracy not reached: {what} (estimate {estimate:e}, error bound {error_bound:e})")]
    Accuracy {
        what: String,
        estimate: f64,
        error_bound: f64,
    },

    /// A precondition on discretisation parameters failed.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A computed quantity contradicts an invariant that must hold.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// An iterative solver failed to converge.
    #[error("no convergence: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
