use thiserror::Error;

use crate::model::{Context, Split};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input file. `location` is `row N` for score files and a
    /// field path such as `hyperparameters[1].domain` for space files.
    #[error("{message} at {location}")]
    Parse { location: String, message: String },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("grid size overflow: {0}")]
    GridOverflow(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid threshold {0}: must lie strictly between 0 and 1")]
    InvalidThreshold(f64),

    #[error("empty context {context} ({split})")]
    EmptyContext { context: Context, split: Split },

    #[error("degenerate context {context} ({split}): every score is 0")]
    DegenerateContext { context: Context, split: Split },

    #[error("split unavailable for context {context}: no {split} records")]
    SplitUnavailable { context: Context, split: Split },

    #[error("configuration {config} has no {split} record in {contexts}")]
    MissingRecords {
        config: String,
        split: Split,
        contexts: String,
    },

    #[error("LOO requires ≥2 datasets, got {0}")]
    TooFewDatasets(usize),

    #[error("need at least two datasets, got {0}")]
    NeedTwoVectors(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
