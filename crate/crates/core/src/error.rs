use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: missing column `{column}`")]
    MissingColumn { column: String },

    #[error("record {row}: {message}")]
    Record { row: usize, message: String },

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("unknown rule `{0}`")]
    UnknownRule(String),

    #[error("pool too small: need {needed}, have {available}")]
    PoolTooSmall { needed: usize, available: usize },

    #[error("rendering error: {0}")]
    Rendering(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("representation mismatch: {0}")]
    RepresentationMismatch(String),

    #[error("embedding provider has no vector for example `{0}`")]
    ProviderMiss(String),

    #[error("transport error{}: {message}", if *.retryable { " (retryable)" } else { "" })]
    Transport { message: String, retryable: bool },

    #[error("extractor must be frozen before adaptation")]
    UnfrozenExtractor,

    #[error("freeze contract violated: {0}")]
    FreezeContract(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("AUC undefined: labels contain a single class")]
    UndefinedAuc,

    #[error("zero variance in column `{0}`")]
    ZeroVariance(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown report format `{0}`")]
    UnknownFormat(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

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

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    pub fn is_retryable(&self) -> bool {
        match self {
            Error::Transport { retryable, .. } => *retryable,
            Error::Context { source, .. } => source.is_retryable(),
            _ => false,
        }
    }
}
