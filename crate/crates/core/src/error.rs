use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("dataset has no usable rows")]
    EmptyDataset,

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("feature `{feature}` is constant on the fitting rows; cannot standardize")]
    DegenerateScale { feature: String },

    #[error("insufficient neighbors: requested k = {requested}, only {available} usable reference rows")]
    InsufficientNeighbors { requested: usize, available: usize },

    #[error("no borderline minority instances (every instance is safe or noise)")]
    NoBorderline,

    #[error("degenerate class composition: {0}")]
    DegenerateClass(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
