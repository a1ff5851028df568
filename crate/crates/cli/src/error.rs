use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Csv { path: PathBuf, line: u64, message: String },

    #[error(transparent)]
    Core(#[from] manifold_vb::Error),
}

impl CliError {
    /// 1 for usage and input errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use manifold_vb::Error as E;
        match self {
            CliError::Core(
                E::DimensionMismatch { .. } | E::OutOfRange { .. } | E::Config(_) | E::NotSymmetric(_) | E::BaseMismatch,
            ) => 1,
            CliError::Core(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
