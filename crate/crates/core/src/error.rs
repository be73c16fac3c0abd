use std::path::PathBuf;

use thiserror::Error;

use crate::skinmodel::PlaneId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("dimension mismatch: expected {expected:?}, got {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("training set is empty")]
    EmptyTraining,

    #[error("unsupported model version {found:?} (expected {expected:?})")]
    ModelVersion { found: String, expected: &'static str },

    #[error("malformed model: {0}")]
    ModelMalformed(String),

    #[error("model is missing plane {0}")]
    ModelMissingPlane(PlaneId),

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("class count {0} out of range (2..=4)")]
    ClassCountOutOfRange(usize),

    #[error("plane too small for edge detection: {width}x{height}")]
    PlaneTooSmall { width: usize, height: usize },

    #[error("malformed ground truth at ({x}, {y}): color {rgb:?} is not near red, black or blue")]
    MalformedGroundTruth { x: usize, y: usize, rgb: [u8; 3] },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
