use std::path::PathBuf;

/// Errors produced anywhere in the quality-assessment pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("manifest {path}, row {row}: {message}")]
    ManifestRow {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("empty manifest")]
    EmptyManifest,

    #[error("decode failed for {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("no decodable frames in {0}")]
    NoFrames(PathBuf),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("model error: {0}")]
    Model(String),

    #[error("unknown layer `{0}`")]
    UnknownLayer(String),

    #[error("inference failed: {0}")]
    Inference(String),

    #[error("missing features for {} video(s): {}", .0.len(), .0.join(", "))]
    MissingFeatures(Vec<String>),

    #[error("format error: {0}")]
    Format(String),

    #[error("video {video_id}: {source}")]
    Video {
        video_id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with the id of the video being processed.
    pub fn for_video(self, video_id: &str) -> Self {
        match self {
            e @ Error::Video { .. } => e,
            e => Error::Video {
                video_id: video_id.to_string(),
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
