use thiserror::Error;

use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition (dimensions, probabilities, lengths).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A successor state has no entry in the next-stage value table.
    #[error("no continuation value for successor state {state}")]
    MissingValue { state: String },

    #[error("linear program solver failed: {0}")]
    Lp(#[from] LpError),

    /// The stage program came back infeasible or unbounded; always a bug or a bad big-M.
    #[error("stage solver internal error: {0}")]
    Internal(String),

    #[error("reachable state space exceeded the cap of {cap} states (reached {reached}); try a smaller horizon")]
    StateCap { cap: usize, reached: usize },

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Parse { .. } | Error::Json(_) => 1,
            Error::StateCap { .. } => 3,
            _ => 2,
        }
    }
}
