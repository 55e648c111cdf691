use thiserror::Error;

/// Errors produced by the learning, exploration and environment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),

    #[error("index out of range: {what} = {index}, limit {limit}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("word index {index} outside vocabulary of size {vocab_size}")]
    Dimension { index: usize, vocab_size: usize },

    #[error("numerical degeneracy: {0}")]
    Numerical(String),

    #[error("no eligible candidate left to explore")]
    ExplorationComplete,

    #[error("no query is pending")]
    NoPendingQuery,

    #[error("target is unreachable")]
    Unreachable,

    #[error("malformed map: {0}")]
    Map(String),

    #[error("environment generation failed: {0}")]
    Generation(String),

    #[error("position ({x:.3}, {y:.3}) is not covered by any annotated region")]
    AnnotationGap { x: f64, y: f64 },

    #[error("word '{0}' is not in the vocabulary")]
    UnknownWord(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
