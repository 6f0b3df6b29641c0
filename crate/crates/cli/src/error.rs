use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration; the message starts with the offending path.
    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] dimlab_core::Error),

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn invalid(path: &str, msg: impl std::fmt::Display) -> Self {
        Self::Validation(format!("{path}: {msg}"))
    }

    /// 2 for validation errors (including bad parameters caught by the core), 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Core(
                dimlab_core::Error::Parameter(_)
                | dimlab_core::Error::Config(_)
                | dimlab_core::Error::OutOfRange { .. }
                | dimlab_core::Error::InvalidMap(_)
                | dimlab_core::Error::InvalidIfs(_)
                | dimlab_core::Error::InvalidWord { .. },
            ) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
