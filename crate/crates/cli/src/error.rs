use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// Prefixes the message with the scenario location it came from.
    pub fn at(self, location: &str) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{location}: {m}")),
            CliError::Numeric(m) => CliError::Numeric(format!("{location}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{location}: {m}")),
        }
    }
}

impl From<lmtsqueeze::Error> for CliError {
    fn from(e: lmtsqueeze::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
