use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{what} exceeded its limit of {limit}")]
    Resource { what: &'static str, limit: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    /// Prefixes the message with where the input came from.
    pub fn context(self, what: &str) -> Self {
        match self {
            Error::Parse { line, column, message } => Error::Parse { line, column, message: format!("{what}: {message}") },
            Error::Invalid(m) => Error::Invalid(format!("{what}: {m}")),
            other => other,
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
