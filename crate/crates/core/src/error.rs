use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("label index {index} out of range for {count} categories")]
    LabelOutOfRange { index: usize, count: usize },

    #[error("unknown label '{0}'")]
    UnknownLabel(String),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("position ({x}, {y}) lies outside the arena")]
    OutOfArena { x: f64, y: f64 },

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("value {value} for {what} outside [0, 1]")]
    OutOfUnitRange { what: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dataset of length {len} too short for washout {washout}")]
    DatasetTooShort { len: usize, washout: usize },

    #[error("normal matrix is singular; use a ridge penalty > 0")]
    SingularNormalMatrix,

    #[error("could not draw a non-degenerate reservoir after {0} attempts")]
    DegenerateReservoir(u32),

    #[error("grid geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("cell ({x}, {y}) is impassable or outside the grid")]
    ImpassableCell { x: usize, y: usize },

    #[error("insufficient events: {got} gated events, need at least {needed}")]
    InsufficientEvents { got: usize, needed: usize },

    #[error("no event could be decoded at prediction step {0}")]
    NoEvent(usize),

    #[error("goal is unreachable from start")]
    Unreachable,

    #[error("malformed {format} file {path}: {message}")]
    Format {
        format: &'static str,
        path: PathBuf,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad inputs rather than by the runtime.
    pub fn is_validation(&self) -> bool {
        if let Error::Csv(e) = self {
            return !matches!(e.kind(), csv::ErrorKind::Io(_));
        }
        matches!(
            self,
            Error::LabelOutOfRange { .. }
                | Error::UnknownLabel(_)
                | Error::InvalidConfig(_)
                | Error::OutOfArena { .. }
                | Error::OutOfUnitRange { .. }
                | Error::NegativeTime(_)
                | Error::LengthMismatch { .. }
                | Error::DatasetTooShort { .. }
                | Error::InsufficientEvents { .. }
                | Error::GeometryMismatch(..)
                | Error::ImpassableCell { .. }
                | Error::Format { .. }
                | Error::Json(_)
        )
    }
}
