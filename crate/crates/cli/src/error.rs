use lrlab_core::LrError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("certification failed: {0}")]
    Failed(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] LrError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config { field: field.into(), message: message.to_string() }
    }

    /// Wraps a library error raised while building `field` from the config.
    pub fn building(field: &str, err: LrError) -> Self {
        match err {
            LrError::DimensionCap { .. } => CliError::Resource(err.to_string()),
            other => CliError::config(field, other),
        }
    }

    /// Library error raised while running; dimension caps stay resource errors.
    pub fn running(err: LrError) -> Self {
        match err {
            LrError::DimensionCap { .. } => CliError::Resource(err.to_string()),
            other => CliError::Numerical(other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Resource(_) => 3,
            CliError::Failed(_) | CliError::Numerical(_) | CliError::Io { .. } => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
