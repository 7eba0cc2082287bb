//! Error types for every module, plus a crate-level wrapper.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("dataset format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },
    #[error("dataset dimension error at byte offset {offset}: {message}")]
    Dimension { offset: u64, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("model is not trained")]
    Untrained,
    #[error("invalid hyperparameter: {0}")]
    Parameter(String),
    #[error("training error: {0}")]
    Training(String),
    #[error("model file format error (line {line}): {message}")]
    Format { line: usize, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid camera parameter: {0}")]
    Parameter(String),
    #[error("degenerate detection: {0}")]
    DegenerateDetection(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum NavError {
    #[error("no assigned stimulus for {0} Hz")]
    NoTarget(u32),
    #[error("illegal transition: event {event} in state {state}")]
    IllegalTransition { state: String, event: String },
    #[error("navigation fault: {0}")]
    Fault(String),
    #[error("invalid world: {0}")]
    World(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error("session error: {0}")]
    Session(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a runtime fault.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Signal(SignalError::Io { .. }) | Error::Model(ModelError::Io { .. }) => false,
            Error::Signal(_) | Error::Metrics(_) | Error::Geometry(_) | Error::Json(_) | Error::Argument(_) => true,
            Error::Model(e) => matches!(
                e,
                ModelError::Parameter(_) | ModelError::Format { .. } | ModelError::Shape(_)
            ),
            Error::Nav(NavError::World(_)) => true,
            Error::Nav(_) | Error::Session(_) | Error::Io { .. } => false,
        }
    }
}
