//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by state construction, model evaluation, and the sweep
/// harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A spin state failed normalization (|c_up|^2 + |c_down|^2 != 1).
    #[error("spin state is not normalized: norm = {norm}")]
    InvalidState { norm: f64 },

    /// A Bloch vector is not unit length.
    #[error("vector is not unit length: norm = {norm}")]
    InvalidVector { norm: f64 },

    /// A 2x2 matrix expected to be Hermitian is not.
    #[error("matrix is not Hermitian (max asymmetry {deviation:e})")]
    NotHermitian { deviation: f64 },

    /// A path-basis tag did not match between two operands.
    #[error("path basis mismatch: expected {expected}, got {got}")]
    BasisMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// Conditioning on an exit port whose probability is numerically zero.
    #[error("projection onto a zero-probability branch")]
    ZeroBranch,

    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No calibration phase reproduces the closed-form subensemble means,
    /// which signals an inconsistent element convention.
    #[error(
        "calibration failed: best deviation {best_deviation:e} at phase {phase} exceeds {tolerance:e}"
    )]
    CalibrationFailure {
        phase: f64,
        best_deviation: f64,
        tolerance: f64,
    },

    /// Filesystem failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A config file line could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A config value parsed but violates a constraint.
    #[error("invalid value for `{field}`: {msg}")]
    Validation { field: &'static str, msg: String },
}

impl Error {
    /// Process exit code for the CLI: 1 for validation/parse/IO trouble,
    /// 2 for calibration failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CalibrationFailure { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
