use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: unsupported image: {reason}", path.display())]
    UnsupportedImage { path: PathBuf, reason: String },

    #[error("{}: cannot decode image: {reason}", path.display())]
    Decode { path: PathBuf, reason: String },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("feature dimension mismatch: model expects {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("class set mismatch: {0}")]
    ClassMismatch(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("{}: unsupported model format version {found} (this build reads version {supported})", path.display())]
    ModelVersion { path: PathBuf, found: u32, supported: u32 },

    #[error("{}: corrupt model file: {reason}", path.display())]
    CorruptModel { path: PathBuf, reason: String },

    #[error("{}:{line}: {reason}", path.display())]
    Csv { path: PathBuf, line: u64, reason: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Process exit code: 1 usage/configuration, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Json(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
