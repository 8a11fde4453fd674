use std::path::PathBuf;

use chrono::NaiveDateTime;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("non-hourly cadence at {0}")]
    NonHourlyCadence(NaiveDateTime),
    #[error("unparseable row at line {line}: {reason}")]
    UnparseableRow { line: u64, reason: String },
    #[error("feature `{0}` is constant over the training rows")]
    DegenerateFeature(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no training windows")]
    EmptyTrainingSet,
    #[error("training diverged at epoch {0} (non-finite loss)")]
    DivergedTraining(usize),
    #[error("insufficient history: {0}")]
    InsufficientHistory(String),
    #[error("zero variance in actual series, correlation undefined (mse = {mse})")]
    ZeroVariance { mse: f64 },

    #[error("predicted total load is zero")]
    ZeroPredictedTotal,
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("mutation parents must be distinct members, got {0:?}")]
    NonDistinctParents([usize; 3]),
    #[error("grid too large: {0}")]
    GridTooLarge(String),
    #[error("baseline must be positive, got {0}")]
    ZeroBaseline(f64),
    #[error("missing prices: {0}")]
    MissingPrices(String),

    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
