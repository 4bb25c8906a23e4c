use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] ifsq_core::Error),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed manifest: {0}")]
    Manifest(#[from] serde_json::Error),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::File { path: path.into(), source }
    }

    /// 2 usage, 3 parse, 4 validation, 5 numerical, 6 I/O.
    pub fn exit_code(&self) -> i32 {
        use ifsq_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidParameter(_) | E::UnsupportedBasis) => 2,
            CliError::Core(E::Parse { .. }) | CliError::Manifest(_) => 3,
            CliError::Core(E::Validation(_) | E::Underdetermined { .. }) => 4,
            CliError::Numerical(_) => 5,
            CliError::Core(E::Io(_)) | CliError::File { .. } => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
