use std::fmt;

use thiserror::Error;

use crate::mapping::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: Position, message: String },
    #[error("unknown prefix `{prefix}:` at {position}")]
    UnknownPrefix { prefix: String, position: Position },
    #[error("unknown vocabulary term <{term}> at {position}")]
    UnknownTerm { term: String, position: Position },
    #[error("dangling rr:parentTriplesMap reference <{reference}> at {position}")]
    DanglingReference { reference: String, position: Position },
    #[error("unsupported source scheme in `{target}`")]
    UnsupportedScheme { target: String },
    #[error("unsupported content type `{value}`")]
    UnsupportedContentType { value: String },
    #[error("no triples map found")]
    NoTriplesMap,
    #[error("invalid mapping at {position}: {message}")]
    Structure { position: Position, message: String },
    #[error("mapping failed validation:\n{0}")]
    Invalid(ValidationReport),
}

impl MappingError {
    pub(crate) fn syntax(position: Position, message: impl Into<String>) -> Self {
        MappingError::Syntax {
            position,
            message: message.into(),
        }
    }

    pub(crate) fn structure(position: Position, message: impl Into<String>) -> Self {
        MappingError::Structure {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("unsupported scheme `{0}`")]
    UnsupportedScheme(String),
    #[error("invalid endpoint `{0}`")]
    InvalidEndpoint(String),
    #[error("connection to {endpoint} failed: {source}")]
    Connect {
        endpoint: String,
        #[source]
        source: std::io::Error,
    },
    #[error("websocket handshake with {endpoint} failed: {message}")]
    Handshake { endpoint: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error("sink {target} unreachable: {source}")]
    SinkUnreachable {
        target: String,
        #[source]
        source: std::io::Error,
    },
    #[error("source failed: {0}")]
    Source(#[from] SourceError),
    #[error("operator `{0}` panicked")]
    OperatorPanic(String),
    #[error("sink write failed: {0}")]
    Sink(#[source] std::io::Error),
}

impl RuntimeError {
    /// Process exit code: 1 for configuration problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RuntimeError::Config(_) | RuntimeError::Mapping(_) => 1,
            _ => 2,
        }
    }
}
