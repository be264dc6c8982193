use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("corpus is empty after {step}")]
    EmptyCorpus { step: String },

    #[error("label count {labels} does not match document count {documents}")]
    LabelCount { labels: usize, documents: usize },

    #[error("embedding dimension {found} does not match configured dimension {expected}")]
    EmbeddingDim { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} distinct points for {needed} clusters, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("non-finite gradient for document {doc_id}")]
    NonFiniteGradient { doc_id: usize },

    #[error("non-finite objective at epoch {epoch}, batch {batch}")]
    NonFiniteObjective { epoch: usize, batch: usize },

    #[error("non-finite values in {0}")]
    NonFinite(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

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

    /// True for failures caused by numerical blow-up rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteGradient { .. }
                | Error::NonFiniteObjective { .. }
                | Error::NonFinite(_)
        )
    }
}
