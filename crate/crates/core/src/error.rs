use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension {dim} has zero range; cannot scale a degenerate dimension")]
    DegenerateDimension { dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("csv column `{0}` not found")]
    MissingColumn(String),

    #[error("non-numeric cell `{value}` in column `{column}` at row {row}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("empty file: {0}")]
    EmptyFile(PathBuf),

    #[error("insufficient rows: need more than {needed}, have {have}")]
    InsufficientRows { needed: usize, have: usize },

    #[error("filtration too large: {edges} edges exceeds cap {cap}; subsample the cloud first")]
    FiltrationTooLarge { edges: usize, cap: usize },

    #[error("points are degenerate (all collinear or coplanar); fall back to a bounding box")]
    DegenerateHull,

    #[error("facet row {row} has zero norm")]
    ZeroFacet { row: usize },

    #[error("{} training points violate the facet system (first: {:?})", violators.len(), violators.first())]
    FacetValidation { violators: Vec<usize> },

    #[error("SMO did not converge after {iterations} iterations (KKT residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Divergence { epoch: usize },

    #[error("unsupported expression node `{0}`")]
    Expression(String),

    #[error("model format: {0}")]
    Format(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn stage(stage: &'static str, source: Error) -> Self {
        Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
