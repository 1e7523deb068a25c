//! Command-line front end: configuration, dispatch and table emission.

pub mod commands;
pub mod config;
pub mod output;

use std::io;

use sivstrain_core::Error as CoreError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A failure with a machine-readable reason.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub reason: &'static str,
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn usage(reason: &'static str, message: impl Into<String>) -> Self {
        CliError {
            reason,
            message: message.into(),
            code: EXIT_USAGE,
        }
    }

    pub fn compute(reason: &'static str, message: impl Into<String>) -> Self {
        CliError {
            reason,
            message: message.into(),
            code: EXIT_COMPUTE,
        }
    }

    pub fn from_io(err: &io::Error, what: &str) -> Self {
        if err.kind() == io::ErrorKind::NotFound {
            CliError::usage("input-not-found", format!("{what}: {err}"))
        } else {
            CliError::usage("io", format!("{what}: {err}"))
        }
    }

    /// Single-line JSON for standard error.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.reason, "message": self.message }).to_string()
    }
}

fn innermost(err: &CoreError) -> &CoreError {
    match err {
        CoreError::Stage { source, .. } => innermost(source),
        other => other,
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let message = err.to_string();
        match innermost(&err) {
            CoreError::Io(e) if e.kind() == io::ErrorKind::NotFound => CliError::usage("input-not-found", message),
            CoreError::Io(_) => CliError::usage("io", message),
            CoreError::Csv(_)
            | CoreError::MissingColumn(_)
            | CoreError::Schema { .. }
            | CoreError::NonMonotonic { .. } => CliError::usage("input-schema", message),
            CoreError::InvalidParameter { .. }
            | CoreError::StrainOutOfRange { .. }
            | CoreError::FrameMismatch { .. }
            | CoreError::OutOfRange { .. } => CliError::compute("invalid-parameter", message),
            _ => CliError::compute("computation", message),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
