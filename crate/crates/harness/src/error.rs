use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    DataFormat { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] landing_core::Error),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
}

impl HarnessError {
    pub fn data(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        HarnessError::DataFormat {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for usage, configuration and I/O problems, 2 for
    /// malformed data files.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::DataFormat { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
