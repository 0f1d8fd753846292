use std::path::PathBuf;

use dysenv::ErrorCategory;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    Schema { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] dysenv::Error),
}

impl CliError {
    pub fn schema(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 config, 3 numerical, 4 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Schema { .. } | CliError::Io { .. } => 2,
            CliError::Core(e) => match e.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Numerical => 3,
                ErrorCategory::Invariant => 4,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
