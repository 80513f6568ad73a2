use std::io;

use thiserror::Error;

/// Errors produced by any stage of the decomposition pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("missing coordinates: {0}")]
    MissingCoordinates(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("path pool exceeded the cap of {cap} paths")]
    PoolExplosion { cap: usize },

    #[error("path pools were built on different graphs")]
    GraphMismatch,

    #[error(
        "no exact cover exists in the path pool ({} uncoverable edges: {uncoverable:?}); try over mode",
        uncoverable.len()
    )]
    InfeasibleExactCover { uncoverable: Vec<usize> },

    #[error("branch-and-bound node limit {limit} exceeded (incumbent {incumbent:?}, gap {gap:?})")]
    NodeLimitExceeded {
        limit: u64,
        incumbent: Option<f64>,
        gap: Option<f64>,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("input graph is not a tree: {0}")]
    NotATree(String),

    #[error("k-fold overlap {0} is out of range (1..=3)")]
    KTooLarge(usize),

    #[error("partitions are over different edge sets ({left} vs {right} edges)")]
    MismatchedEdgeSets { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Name of the module that raised the error, used in CLI diagnostics.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::MissingCoordinates(_) => {
                "graph-core"
            }
            Error::Io(_) => "graph-core",
            Error::DegenerateGeometry(_) => "roughness",
            Error::PoolExplosion { .. } | Error::GraphMismatch => "path-pool",
            Error::InfeasibleExactCover { .. }
            | Error::NodeLimitExceeded { .. }
            | Error::NumericalFailure(_) => "cover-solver",
            Error::NotATree(_) | Error::KTooLarge(_) => "tree-solver",
            Error::MismatchedEdgeSets { .. } => "similarity",
            Error::Config(_) => "cli",
        }
    }
}
