use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("malformed percent encoding in {text:?}")]
    MalformedEncoding { text: String },

    #[error("character {0:?} is not in the query alphabet")]
    UnknownCharacter(char),

    #[error("all samples share one class")]
    DegenerateLabels,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("too few samples: need {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("no ground truth for query {0:?}")]
    MissingTruth(String),

    #[error("labeler unavailable: {0}")]
    LabelerUnavailable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
