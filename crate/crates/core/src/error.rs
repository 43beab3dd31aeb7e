use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the selection, recovery and experiment routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration of {requested} subsets exceeds the cap of {cap}")]
    Capacity { requested: u128, cap: u128 },

    #[error("degenerate distribution: every subset has zero weight")]
    DegenerateDistribution,

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
