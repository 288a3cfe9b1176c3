use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// One entry per violated constraint, `field: reason`.
    #[error("invalid experiment config: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error(transparent)]
    Solver(#[from] vi_core::Error),
}
