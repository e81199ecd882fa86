use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("image is empty")]
    EmptyImage,

    #[error("degenerate box {w}x{h} at ({x}, {y})")]
    DegenerateBox { x: u32, y: u32, w: u32, h: u32 },

    #[error("box ({x}, {y}, {w}, {h}) does not fit a {width}x{height} image")]
    BoxOutOfImage {
        x: u32,
        y: u32,
        w: u32,
        h: u32,
        width: u32,
        height: u32,
    },

    #[error("cutout of {cutout_w}x{cutout_h} px at minimum scale {scale} is larger than background '{background}' ({width}x{height})")]
    CutoutTooLarge {
        background: String,
        cutout_w: u32,
        cutout_h: u32,
        scale: f64,
        width: u32,
        height: u32,
    },

    #[error("no cutout fits any anchor of background '{0}'")]
    Unsatisfiable(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("worker pool: {0}")]
    Pool(String),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn image(path: &Path, source: image::ImageError) -> Self {
        Error::Image {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn json(path: &Path, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.to_path_buf(),
            source,
        }
    }

    /// True for errors caused by bad inputs rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Pool(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
