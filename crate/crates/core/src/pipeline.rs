//! Sampling followed by solving, as driven by the command line and the
//! robustness scans.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::WeightedGeometricGraph;
use crate::pool::{pool_union, sample_bfs, sample_rmst, PathPool, SamplerConfig};
use crate::solver::{solve, FilamentCover, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PathMethod {
    Bfs,
    Rmst,
    Both,
}

impl PathMethod {
    pub fn name(self) -> &'static str {
        match self {
            PathMethod::Bfs => "bfs",
            PathMethod::Rmst => "rmst",
            PathMethod::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub paths: PathMethod,
    pub sampler: SamplerConfig,
    pub solver: SolverConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            paths: PathMethod::Bfs,
            sampler: SamplerConfig::default(),
            solver: SolverConfig::default(),
        }
    }
}

pub fn build_pool(
    graph: &WeightedGeometricGraph,
    method: PathMethod,
    sampler: &SamplerConfig,
) -> Result<PathPool> {
    match method {
        PathMethod::Bfs => sample_bfs(graph, sampler),
        PathMethod::Rmst => sample_rmst(graph, sampler),
        PathMethod::Both => pool_union(
            graph,
            &sample_bfs(graph, sampler)?,
            &sample_rmst(graph, sampler)?,
        ),
    }
}

/// Samples a pool and solves the cover program on it.
pub fn decompose(graph: &WeightedGeometricGraph, config: &PipelineConfig) -> Result<FilamentCover> {
    let pool = build_pool(graph, config.paths, &config.sampler)?;
    solve(&pool, graph, &config.solver)
}
