//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: String,
        got: String,
    },
    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("non-degeneracy error: {0}")]
    NonDegenerate(String),
    #[error("invariance error: residual {residual:e} exceeds tolerance {tol:e}")]
    Invariance { residual: f64, tol: f64 },
    #[error("structural error: {0}")]
    Structural(String),
    #[error("divergence at step {step}: non-finite state")]
    Divergence { step: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(what: &str, expected: impl ToString, got: impl ToString) -> Error {
    Error::Dimension {
        what: what.to_string(),
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
