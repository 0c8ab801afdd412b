use fuchsnorm_core::Error as CoreError;
use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("assumption failure: {0}")]
    Assumption(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema { pointer: pointer.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Assumption(_) => 2,
            CliError::Schema { .. } | CliError::Usage(_) | CliError::Io { .. } => 3,
            CliError::Numeric(_) | CliError::Verification(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Assumption(_) | CoreError::LinearResonance { .. } => CliError::Assumption(e.to_string()),
            CoreError::Shape(_) | CoreError::Invalid(_) => CliError::schema("/", e.to_string()),
            CoreError::Singular(_) | CoreError::NoConvergence | CoreError::Numeric(_) => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
