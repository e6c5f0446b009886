use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command-line front end.
///
/// [`CliError::exit_code`] maps them onto the process contract: input and usage
/// problems exit with 2, everything else with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Schema { path: PathBuf, line: u64, message: String },

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Core(#[from] krigeweight::Error),

    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use krigeweight::Error as E;
        match self {
            CliError::Schema { .. } | CliError::File { .. } | CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Core(E::InvalidInput(_) | E::MissingField(_) | E::NegativeDistance(_) | E::EmptySample(_) | E::TooLarge(_)) => 2,
            CliError::Core(_) | CliError::Io { .. } | CliError::Internal(_) => 1,
        }
    }

    pub fn schema(path: &std::path::Path, line: u64, message: impl Into<String>) -> Self {
        CliError::Schema { path: path.to_path_buf(), line, message: message.into() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
