use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: I/O error: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate article id {0:?}")]
    DuplicateId(String),
    #[error("unknown question {0:?}")]
    UnknownQuestion(String),
    #[error("line {line}: malformed triple: {reason}")]
    MalformedTriple { line: usize, reason: String },
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("invalid probability pair (p_pos={p_pos}, p_neg={p_neg})")]
    InvalidProbability { p_pos: f64, p_neg: f64 },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("input is empty")]
    EmptyInput,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no embedding for article {0:?}")]
    MissingEmbedding(String),
    #[error("unknown article {0:?}")]
    UnknownArticle(String),
    #[error("user {0:?} has an empty history")]
    EmptyHistory(String),
    #[error("need {needed} candidate articles, only {available} available")]
    InsufficientCandidates { needed: usize, available: usize },
    #[error("labels contain a single class")]
    SingleClass,
    #[error("zero variance")]
    ZeroVariance,
    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("interaction log is empty")]
    EmptyLog,
    #[error("training data has no negative labels")]
    NoNegatives,
    #[error("training data has no positive labels")]
    NoPositives,
    #[error("training diverged at epoch {epoch}")]
    DivergenceDetected { epoch: usize },
    #[error("corpus has {available} articles, preview needs {needed}")]
    CorpusTooSmall { needed: usize, available: usize },
    #[error("test article {article_id:?} leaked into the profile of user {user_id:?}")]
    Leakage { user_id: String, article_id: String },
    #[error("recommendation list is empty")]
    EmptyRecommendations,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data or configuration, as opposed
    /// to failures while running a computation.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. } | Error::DivergenceDetected { .. } | Error::Leakage { .. }
        )
    }
}
