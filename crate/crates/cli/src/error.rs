use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("flock validation failed: {0}")]
    FlockValidation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Compute(#[from] zzbound_core::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 config error, 3 flock validation failure,
    /// 1 anything else. Certification failure (4) is not an error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::FlockValidation(_) => 3,
            CliError::Io { .. } | CliError::Compute(_) => 1,
        }
    }
}
