//! Filament decomposition of weighted geometric graphs.
//!
//! A graph is decomposed into filaments by sampling candidate paths
//! ([`pool`]), scoring them with roughness functionals ([`roughness`]) and
//! choosing an optimal subset that covers every edge ([`solver`]). Trees can
//! be solved directly by dynamic programming ([`tree`]). Covers are compared
//! with partition similarity indices ([`similarity`]), summarized per
//! filament ([`metrics`]) and stress-tested under perturbations
//! ([`robustness`]).

pub mod cli;
pub mod error;
pub mod generators;
pub mod gml;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod pool;
pub mod robustness;
pub mod roughness;
pub mod similarity;
pub mod solver;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{EdgePartition, WeightedGeometricGraph};
pub use pool::{PathPool, SamplerConfig};
pub use roughness::{FilamentPath, RoughnessKind};
pub use solver::{CoverMode, FilamentCover, Objective, SolverConfig};

/// Semantic version of the library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Source revision the binary was built from, or `unknown`.
pub const BUILD_HASH: &str = env!("FILACOVER_BUILD_HASH");
