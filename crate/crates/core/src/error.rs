use thiserror::Error;

/// Errors surfaced by parsing, fitting, and classification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid time series {id:?}: {message}")]
    InvalidSeries { id: String, message: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("unknown feature id {0:?}")]
    UnknownFeature(String),

    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),

    #[error("class {0:?} has no training rows")]
    ClassMissing(String),

    #[error("need at least two classes, got {0}")]
    TooFewClasses(usize),

    #[error("feature column {0:?} contains special values")]
    SpecialInColumn(String),

    #[error("special value in row {0:?}; series cannot be scored")]
    UnscorableRow(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("warping window {window} cannot reach the terminal cell for lengths {len_a} and {len_b}")]
    BandExcludesTerminal {
        window: usize,
        len_a: usize,
        len_b: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
