use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] qmps_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// The run stopped early; its outputs were written and flagged.
    #[error("run incomplete: {0}")]
    Partial(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 1 for bad input, 2 for numerical failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        use qmps_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 1,
            CliError::Core(E::InvalidArgument(_) | E::ResourceLimit(_)) => 1,
            CliError::Core(_) | CliError::Partial(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub(crate) fn config_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Config(msg.into()))
}
