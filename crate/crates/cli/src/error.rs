use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI job, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("refusing to overwrite {} (pass --overwrite)", .0.display())]
    WouldOverwrite(PathBuf),
    #[error("numerical error at step {step}: {source}")]
    Integration {
        step: usize,
        #[source]
        source: mprk_core::Error,
    },
    #[error("numerical error: {0}")]
    Numerical(#[from] mprk_core::Error),
}

impl CliError {
    /// 1 for usage, configuration and file errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Integration { .. } | CliError::Numerical(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<mprk_core::IntegrationError> for CliError {
    fn from(e: mprk_core::IntegrationError) -> Self {
        CliError::Integration {
            step: e.step,
            source: e.source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
