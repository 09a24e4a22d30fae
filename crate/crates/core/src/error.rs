use std::fmt;

/// Errors produced by the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("{0}")]
    Geometry(GeometryError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("length mismatch: {left} candidates vs {right} references")]
    LengthMismatch { left: usize, right: usize },
    #[error("frameless description: {0:?}")]
    FramelessDescription(String),
    #[error("no template for frame type `{0}`")]
    MissingTemplate(String),
    #[error("semantic assembly failed: {0}")]
    Assembly(String),
    #[error("grammar error: {0}")]
    Grammar(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("image_id sets differ: {missing} missing from predictions, {extra} unexpected (first: {example})")]
    ImageSetMismatch {
        missing: usize,
        extra: usize,
        example: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Geometric failure modes of the shrink-mask operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    DegeneratePolygon,
    CentroidExterior,
    OverShrunk,
    TooFewSamples,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeometryError::DegeneratePolygon => "degenerate polygon",
            GeometryError::CentroidExterior => "centroid exterior",
            GeometryError::OverShrunk => "over-shrunk",
            GeometryError::TooFewSamples => "dense contour needs at least 16 points",
        })
    }
}

impl From<GeometryError> for Error {
    fn from(e: GeometryError) -> Self {
        Error::Geometry(e)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
