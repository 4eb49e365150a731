use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] fringelab::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for anything the caller can fix by changing the input, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                fringelab::Error::NotConverged(_) | fringelab::Error::AttemptsExhausted { .. } => 2,
                _ => 1,
            },
            CliError::Write { .. } | CliError::Serialize(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        if self.exit_code() == 1 {
            "validation"
        } else {
            "internal"
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
