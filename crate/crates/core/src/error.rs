use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A schedule entry violates the model assumptions. `index` is 1-based.
    #[error("invalid schedule entry at t={index}: {reason}")]
    Schedule { index: usize, reason: String },

    #[error("length mismatch: expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid rate policy: {0}")]
    Policy(String),

    /// The rate-contour solver could not bracket or converge. Never silently
    /// clamped; the message carries the bracket diagnostics.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A solver failure tagged with the time step that triggered it.
    #[error("solver failure at t={t}: {source}")]
    SolverAt { t: usize, source: Box<Error> },

    #[error("exact enumeration is limited to T <= {max}, requested T = {requested}")]
    Budget { max: usize, requested: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// No rate-function case matched; indicates an internal inconsistency.
    #[error("unclassifiable operating point: {0}")]
    Unclassifiable(String),
}

impl Error {
    /// Wraps a solver error with the time step it occurred at.
    pub(crate) fn at_time(self, t: usize) -> Error {
        Error::SolverAt { t, source: Box::new(self) }
    }

    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Solver(_) | Error::SolverAt { .. })
    }
}
