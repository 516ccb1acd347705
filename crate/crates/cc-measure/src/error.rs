//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The Engel boundary-value solver exhausted its restarts with the
    /// endpoint residual still above tolerance. The best upper bound found
    /// so far is carried along so callers can degrade gracefully.
    #[error("solver failed: {message} (best bound {best_bound:.6}, residual {residual:.3e})")]
    SolverFailed {
        message: String,
        best_bound: f64,
        residual: f64,
    },

    /// A metric-derivative estimate did not settle at the listed times.
    #[error("estimate did not converge at t = {times:?}")]
    NotConverged { times: Vec<f64> },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
