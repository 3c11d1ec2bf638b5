use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Numerical,
    Mismatch,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("feature `{feature}` is constant ({value}) in the fitting data")]
    ConstantFeature { feature: &'static str, value: f64 },

    #[error("length mismatch: {left} targets vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("{0}")]
    Undefined(String),

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },

    #[error(
        "rank-deficient system (rank {rank} < {needed}); use a positive ridge penalty"
    )]
    RankDeficient { rank: usize, needed: usize },

    #[error("repetition {repetition}: {source}")]
    Repetition {
        repetition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("normalizer mismatch: {left} vs {right}")]
    NormalizerMismatch { left: String, right: String },

    #[error("csv: {0}")]
    Csv(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Invalid(_)
            | Error::ConstantFeature { .. }
            | Error::LengthMismatch { .. }
            | Error::Empty(_)
            | Error::Csv(_)
            | Error::Json(_) => ErrorKind::Validation,
            Error::Undefined(_) | Error::Diverged { .. } | Error::RankDeficient { .. } => {
                ErrorKind::Numerical
            }
            Error::Repetition { source, .. } => source.kind(),
            Error::NormalizerMismatch { .. } => ErrorKind::Mismatch,
            Error::Io { .. } => ErrorKind::Io,
        }
    }
}
