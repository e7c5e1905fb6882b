//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by scenario construction, solvers and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration key is missing or holds an unusable value.
    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// Inputs disagree on cluster dimensions (users, base stations, antennas).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A precoder stores a nonzero block outside the cooperation map.
    #[error("precoder support violates the cooperation map at (bs {bs}, user {user})")]
    SupportViolation { bs: usize, user: usize },

    /// A per-antenna power exceeds the budget beyond numerical tolerance.
    #[error("antenna power {power:.6e} exceeds budget {budget:.6e} at (bs {bs}, antenna {antenna})")]
    PowerViolation {
        bs: usize,
        antenna: usize,
        power: f64,
        budget: f64,
    },

    /// An argument is outside the documented domain of an operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The aggregated channel matrix cannot be inverted (zero forcing).
    #[error("aggregated channel matrix is rank deficient")]
    RankDeficient,

    /// The conic backend reported an unusable solution.
    #[error("conic solve failed: {0}")]
    Solver(String),

    /// Every randomized restart of an iterative solver failed.
    #[error("all {0} restarts failed without a usable iterate")]
    AllRestartsFailed(usize),

    /// An algorithm token in the run configuration is not recognised.
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}
