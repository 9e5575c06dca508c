//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by vector arithmetic, problem evaluation, schedules,
/// and the experiment harness.
#[derive(Debug, Error)]
pub enum LionError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point outside certified domain: {0}")]
    Domain(String),

    #[error("iteration budget too small: {0}")]
    Budget(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unsupported problem: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LionError>;
