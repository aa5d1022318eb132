use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("no interior 1-RSB solution: {0}")]
    NoInteriorSolution(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("non-convergence: {0}")]
    NonConvergence(String),

    #[error("resource budget exceeded: degree {degree} needs {entries} tensor entries, total {total} > {limit}")]
    Budget {
        degree: u32,
        entries: u128,
        total: u128,
        limit: u128,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
