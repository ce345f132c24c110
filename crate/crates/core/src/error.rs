use thiserror::Error;

/// Errors raised by samplers, codecs and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid search-depth curve: {0}")]
    InvalidCurve(String),
    #[error("invalid parenthesis encoding: {0}")]
    InvalidEncoding(String),
    #[error("vertex {0} is not in the tree")]
    InvalidVertex(usize),
    #[error("anchor set is empty")]
    EmptyAnchors,
    #[error("cluster exceeded the vertex cap of {0}")]
    CapExceeded(usize),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("vertex {0} is not covered by the projection index")]
    Uncovered(usize),
    #[error("horizon exhausted at time {reached} before clock reached {target}")]
    HorizonExceeded { reached: f64, target: f64 },
    #[error("insufficient samples: need {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
