use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A text input (graph, partition, stream, CSV) is malformed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A protocol broke the rules of the communication model.
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    /// A sweep grid point failed; carries the coordinates of the failing run.
    #[error("run failed at {coordinates}: {source}")]
    Run {
        coordinates: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: msg.into(),
    }
}
