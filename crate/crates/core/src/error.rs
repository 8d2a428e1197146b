use std::path::PathBuf;

use thiserror::Error;

use crate::problems::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),

    #[error("mesh dimension {mesh} does not match element dimension {element}")]
    DimensionMismatch { mesh: usize, element: usize },

    #[error("degenerate element {cell}: condition estimate {condition:.3e}")]
    DegenerateElement { cell: usize, condition: f64 },

    #[error("unsupported quadrature: dimension {dimension}, degree {degree}")]
    UnsupportedQuadrature { dimension: usize, degree: usize },

    #[error("coefficient evaluation failed in cell {cell} at ({x}, {y}): {source}")]
    CoefficientEval {
        cell: usize,
        x: f64,
        y: f64,
        #[source]
        source: EvalError,
    },

    #[error("boundary data for dof {dof} is not available: {reason}")]
    MissingBoundaryData { dof: usize, reason: String },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("dense diagnostic ceiling exceeded: {dofs} free dofs > {ceiling}")]
    CeilingExceeded { dofs: usize, ceiling: usize },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
