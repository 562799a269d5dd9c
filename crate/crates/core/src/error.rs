use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing column `{0}` in CSV header")]
    MissingColumn(String),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("negative or non-finite edge weight {weight} on ({i}, {j})")]
    InvalidWeight { i: usize, j: usize, weight: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed token `{0}`")]
    MalformedToken(String),

    #[error("no embedding for `{0}`")]
    MissingEmbedding(String),

    #[error("sequence of length {0} has no prediction target")]
    SequenceTooShort(usize),

    #[error("non-finite gradient in `{0}`")]
    NonFiniteGradient(&'static str),

    #[error("AUC is undefined when only one class is present")]
    SingleClass,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

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

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
