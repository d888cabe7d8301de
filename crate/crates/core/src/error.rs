use std::path::PathBuf;

use thiserror::Error;

use crate::vehicle::VehicleState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("track parse error at line {line}: {message}")]
    TrackParse { line: usize, message: String },

    #[error("invalid track: {0}")]
    TrackValidation(String),

    #[error("point ({x:.3}, {y:.3}) is {distance:.3} m from the centerline (limit {limit:.3} m)")]
    OutOfCorridor {
        x: f64,
        y: f64,
        distance: f64,
        limit: f64,
    },

    #[error("heading {psi:.4} rad relative to the centerline leaves the path tangent undefined")]
    HeadingDegenerate { psi: f64 },

    #[error("integration produced a non-finite state: {state:?}")]
    IntegrationBlowup { state: Box<VehicleState> },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("replay buffer holds {size} transitions, batch needs {batch}")]
    NotReady { size: usize, batch: usize },

    #[error("environment stepped after episode ended ({0:?})")]
    EpisodeOver(crate::env::EpisodeStatus),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
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
}
