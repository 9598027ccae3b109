use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the dataset, scene and evaluation machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grasp: {0}")]
    InvalidGrasp(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("ground-truth set is empty; annotation data unusable")]
    EmptyGroundTruth,
    #[error("no predictions to score")]
    NoPredictions,
    #[error("unknown scene ids: {}", .0.join(", "))]
    UnknownScenes(Vec<String>),
    #[error("object is empty (no cell above the table plane)")]
    EmptyObject,
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("object {id} cannot be placed inside the camera frame")]
    DoesNotFit { id: String },
    #[error("jaw size {0} m is not one of the configured gripper sizes")]
    InvalidJawSize(f64),
    #[error("grasp center ({x}, {y}) lies outside the {width}x{height} image")]
    CenterOutsideImage {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },
    #[error("{}:{line}: {msg}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
