use std::path::PathBuf;

use thiserror::Error;

use pwi_core::scoring::IncompatibilityReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("no compatible value function: {0}")]
    Incompatible(IncompatibilityReport),

    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Incompatible(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<pwi_core::Error> for CliError {
    fn from(e: pwi_core::Error) -> Self {
        match e {
            pwi_core::Error::Solver(_) => CliError::Solver(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
