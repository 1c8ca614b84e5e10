use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed input file content.
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) | AppError::Input { .. } => 1,
            AppError::Numerical(_) => 2,
            AppError::Io { .. } => 3,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn input(path: &Path, message: impl Into<String>) -> Self {
        AppError::Input {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        AppError::Validation(message.into())
    }
}

impl From<mtnet_core::Error> for AppError {
    fn from(e: mtnet_core::Error) -> Self {
        if e.is_numerical() {
            AppError::Numerical(e.to_string())
        } else {
            AppError::Validation(e.to_string())
        }
    }
}
