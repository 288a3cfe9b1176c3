use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A point lies outside the domain where the prox-function is differentiable.
    #[error("domain error: {0}")]
    Domain(String),

    /// The combination of prox setup, feasible set and options is unsupported.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// The inner line search kept doubling `M` without satisfying the
    /// acceptance test; the oracle does not conform to its declared model.
    #[error("line search diverged at iteration {iteration} after {trials} trials (last M = {last_m:e})")]
    Diverged {
        iteration: usize,
        trials: usize,
        last_m: f64,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
