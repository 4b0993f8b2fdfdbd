use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition (dimension mismatch,
    /// point outside the box, malformed bounds).
    #[error("domain error: {0}")]
    Domain(String),

    /// The request is well formed but exceeds a size guard.
    #[error("refused: {0}")]
    Refused(String),

    /// The LP engine could not produce a trustworthy answer.
    #[error("LP solver failure: {0}")]
    SolverFailure(String),

    #[error("cannot partition a zero-volume box")]
    CannotPartition,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
