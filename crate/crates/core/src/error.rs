use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset file not found: {0}")]
    MissingFile(PathBuf),

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("duplicate record id `{0}`")]
    DuplicateId(String),

    #[error("record `{id}` text is {len} characters (limit 280)")]
    TextTooLong { id: String, len: usize },

    #[error("record `{id}`: scenario {scenario} does not match label {label}")]
    ScenarioMismatch {
        id: String,
        scenario: String,
        label: String,
    },

    #[error("unlabeled records: {}", .0.join(", "))]
    Unlabeled(Vec<String>),

    #[error("dataset too small to split: {0} records (need at least 3)")]
    TooSmall(usize),

    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),

    #[error("token length {length} at position {index} is outside [1, 512]")]
    LengthOutOfRange { index: usize, length: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    Empty,

    #[error("augmentation factor must be at least 2, got {0}")]
    InvalidFactor(usize),

    #[error("unknown parameter group `{0}`")]
    UnknownGroup(String),

    #[error("token id {id} out of vocabulary (size {vocab})")]
    TokenOutOfVocab { id: u32, vocab: usize },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("training split is empty")]
    EmptyTraining,

    #[error("missing dataset statistics for `{0}`")]
    MissingStats(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
