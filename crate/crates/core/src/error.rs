use std::io;

use thiserror::Error;

/// Errors produced anywhere in the mapping and planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("zero-length segment")]
    ZeroLengthSegment,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("point ({x:.6}, {y:.6}, {z:.6}) is not inside any cluster")]
    NotLocated { x: f64, y: f64, z: f64 },

    #[error("no path between the query points")]
    NoPath,

    #[error("hull contains no voxel centers")]
    EmptyHull,

    #[error("malformed topomap: {0}")]
    Format(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn not_located(p: &crate::Point3) -> Self {
        Error::NotLocated { x: p.x, y: p.y, z: p.z }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage { stage, source: Box::new(e) },
        }
    }

    /// Innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
