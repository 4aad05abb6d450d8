use std::fmt;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem instance: {0}")]
    InvalidInstance(String),

    #[error("placement has dimensions {found_rows}x{found_cols}, expected {expected_rows}x{expected_cols}")]
    DimensionMismatch { expected_rows: usize, expected_cols: usize, found_rows: usize, found_cols: usize },

    #[error("invalid placement: worst constraint violation {worst_violation:e}")]
    InvalidPlacement { worst_violation: f64 },

    #[error("placement is not popularity-first (worst ordering violation {worst_violation:e})")]
    NotPopularityFirst { worst_violation: f64 },

    #[error("{what}: {count} exceeds enumeration limit {limit}; reduce the number of files or users")]
    EnumerationLimit { what: &'static str, count: u128, limit: u128 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("{problem} solve ended with status {status}")]
    Solver { problem: String, status: crate::lp::LpStatus },

    #[error("quantization failed: {0}")]
    Quantization(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn instance(msg: impl fmt::Display) -> Self {
        Error::InvalidInstance(msg.to_string())
    }
}
