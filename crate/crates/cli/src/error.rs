use fouriervol_core::EstimatorError;
use fouriervol_sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("SchemaError: line {line}: {message}")]
    Schema { line: u64, message: String },

    #[error("ParseError: line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("EmptySeries: {0}")]
    EmptySeries(String),

    #[error("ConfigError: {0}")]
    Config(String),

    #[error("UsageError: {0}")]
    Usage(String),

    #[error("IoError: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Estimator(#[from] EstimatorError),

    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// 2 for I/O failures, 1 for everything the user can fix in the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
