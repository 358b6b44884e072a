use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed schema: {0}")]
    Schema(String),

    #[error("malformed responses: {0}")]
    Responses(String),

    #[error("invalid label {label:?} in row {row}, column {column:?}")]
    UnknownLabel {
        row: usize,
        column: String,
        label: String,
    },

    #[error("insufficient respondents: need at least {needed}, got {got}")]
    InsufficientRespondents { needed: usize, got: usize },

    #[error("insufficient questions: need at least {needed}, got {got}")]
    InsufficientQuestions { needed: usize, got: usize },

    #[error("invalid adjacency matrix: {0}")]
    InvalidAdjacency(String),

    #[error("adjacency matrix has no edges")]
    EmptyAdjacency,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("every cluster is a unit-cluster")]
    OnlyUnitClusters,

    #[error("{step}: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Tags the error with the pipeline step it came from.
    pub fn at(self, step: &'static str) -> Error {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Whether the error originates in user-supplied data rather than in a numerical routine.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Step { source, .. } => source.is_data_error(),
            Error::Schema(_)
            | Error::Responses(_)
            | Error::UnknownLabel { .. }
            | Error::InsufficientRespondents { .. }
            | Error::InsufficientQuestions { .. }
            | Error::InvalidAdjacency(_)
            | Error::EmptyAdjacency
            | Error::Dimension(_)
            | Error::OnlyUnitClusters
            | Error::Json(_)
            | Error::Csv(_) => true,
            _ => false,
        }
    }

    /// Whether the error is a configuration or argument problem.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Step { source, .. } => source.is_config_error(),
            Error::Config(_) | Error::InvalidArgument(_) => true,
            _ => false,
        }
    }
}
