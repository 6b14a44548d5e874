use std::path::PathBuf;

use hazrank_core::Error as CoreError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
/// Bad arguments, configuration, input files or I/O.
pub const EXIT_USAGE: i32 = 2;
/// The fit did not converge (the report is still written).
pub const EXIT_NOT_CONVERGED: i32 = 3;
/// Too little data for the requested diagnostic.
pub const EXIT_INSUFFICIENT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("fit did not converge")]
    NotConverged,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotConverged | CliError::Core(CoreError::SingularHessian) => EXIT_NOT_CONVERGED,
            CliError::Core(CoreError::InsufficientData(_)) => EXIT_INSUFFICIENT,
            _ => EXIT_USAGE,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
