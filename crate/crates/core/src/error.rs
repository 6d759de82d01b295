use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A joint plan was passed where a per-beam plan is required (or vice versa).
    #[error("sync mode error: {0}")]
    Mode(String),

    /// A beam assignment violates a scheduling constraint.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// Exhaustive search would exceed the candidate guard.
    #[error("search space of {candidates} assignments exceeds the limit of {limit}")]
    SearchSpace { candidates: u128, limit: u128 },

    #[error("no scheduled beams: {0}")]
    EmptyAssignment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
