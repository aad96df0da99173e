use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
///
/// Variants split into two families: validation problems (bad input,
/// violated contracts) and runtime failures (I/O, numerical breakdown).
/// The CLI maps them to exit codes 1 and 2 respectively.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("series too short for {what}: length {len}, need at least {needed}")]
    SeriesTooShort {
        what: &'static str,
        len: usize,
        needed: usize,
    },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("zero range: cannot normalize a constant series")]
    ZeroRange,
    #[error("degenerate series: {0}")]
    Degenerate(String),
    #[error("singular normal equations: {0}")]
    Singular(String),
    #[error("inconsistent transform stack: {0}")]
    InconsistentStack(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("insufficient windows: {0}")]
    InsufficientWindows(String),
    #[error("gradient overflow: non-finite gradient entry at index {index}")]
    GradientOverflow { index: usize },
    #[error("tape error: {0}")]
    Tape(&'static str),
    #[error("support size mismatch: model was meta-trained with K={expected}, got K={got}")]
    KMismatch { expected: usize, got: usize },
    #[error("non-finite loss at adaptation step {step}")]
    NonFiniteLoss { step: usize },
    #[error("{aborted} of {total} tasks aborted (limit is 10%)")]
    TooManyAborts { aborted: usize, total: usize },
    #[error("AR coefficients {0:?} do not define a stationary process")]
    NonstationaryAr(Vec<f64>),
    #[error("duplicate domain name {0:?}")]
    DuplicateName(String),
    #[error("{path}:{line}: {msg}")]
    Csv {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} of {total} experiment cells failed; first failure: {first}")]
    CellsFailed {
        failed: usize,
        total: usize,
        first: String,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for contract violations detected before or instead of computing.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. }
                | Error::NonFiniteLoss { .. }
                | Error::TooManyAborts { .. }
                | Error::GradientOverflow { .. }
                | Error::Tape(_)
                | Error::CellsFailed { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
