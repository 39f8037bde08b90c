use thiserror::Error;

/// Failure of a command, carrying its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] cisdag_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for negative results of a well-posed question, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(cisdag_core::Error::MleDoesNotExist { .. } | cisdag_core::Error::NoCandidate { .. }) => 1,
            _ => 2,
        }
    }
}
