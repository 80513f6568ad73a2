//! Filament Cover Problem over a path pool.
//!
//! The total objective is a weighted set-cover (or set-partitioning)
//! program solved exactly by branch-and-bound. The average objective is
//! reduced to a sequence of total-objective problems with shifted costs
//! `r_p − λ` (Dinkelbach iteration).

mod setcover;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgePartition, WeightedGeometricGraph};
use crate::pool::{PathPool, RNG_NAME};
use crate::roughness::{FilamentPath, RoughnessKind};

/// Discount per initial fragment contained in a path when merging.
pub const FRAGMENT_DISCOUNT: f64 = 1e4;
/// Per-path offset when merging; favors covers with fewer paths.
pub const PATH_OFFSET: f64 = 1e8;
/// Iteration cap of the parametric average-objective solver.
pub const MAX_DINKELBACH_ITERATIONS: usize = 100;

/// Coverage constraint: each edge exactly once, or at least once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CoverMode {
    Exact,
    Over,
}

impl CoverMode {
    pub fn name(self) -> &'static str {
        match self {
            CoverMode::Exact => "exact",
            CoverMode::Over => "over",
        }
    }
}

/// Sum of path roughness, or its mean over selected paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Total,
    Avg,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Total => "total",
            Objective::Avg => "avg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub cover_mode: CoverMode,
    pub objective: Objective,
    pub roughness_kind: RoughnessKind,
    /// Big-M constant of the linearized average program. Only used by
    /// cross-checks; the production path is parametric.
    pub big_m: f64,
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub node_limit: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cover_mode: CoverMode::Over,
            objective: Objective::Total,
            roughness_kind: RoughnessKind::Pair,
            big_m: 2.0,
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            node_limit: 10_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.big_m.is_nan() || self.big_m < 2.0 {
            return Err(Error::Config(format!(
                "big_m must be at least 2, got {}",
                self.big_m
            )));
        }
        if !(self.feas_tol > 0.0 && self.opt_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Diagnostics attached to a cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes_explored: u64,
    pub pool_size: usize,
    pub wall_time_s: f64,
    pub seed: u64,
    pub method: String,
    pub rng: String,
    /// Number of linear subproblems solved (1 for the total objective).
    pub subproblems: usize,
}

/// Selected filaments with their labels and objective value.
///
/// Filaments are ordered by decreasing edge count, ties by the smallest
/// sorted edge-id list; filament `i` carries label `i`.
#[derive(Debug, Clone)]
pub struct FilamentCover {
    pub selected: Vec<FilamentPath>,
    pub labels: EdgePartition,
    pub objective_value: f64,
    pub objective_kind: Objective,
    pub roughness_kind: RoughnessKind,
    pub cover_mode: CoverMode,
    pub stats: SolverStats,
}

impl FilamentCover {
    /// Orders the filaments, assigns labels, checks coverage and evaluates
    /// the objective from scratch.
    pub fn new(
        graph: &WeightedGeometricGraph,
        mut selected: Vec<FilamentPath>,
        objective_kind: Objective,
        roughness_kind: RoughnessKind,
        cover_mode: CoverMode,
        stats: SolverStats,
    ) -> Result<Self> {
        selected.sort_by(|a, b| {
            b.len()
                .cmp(&a.len())
                .then_with(|| a.edge_set().cmp(&b.edge_set()))
        });
        let edge_lists: Vec<Vec<usize>> = selected.iter().map(|p| p.edges().to_vec()).collect();
        let labels = EdgePartition::from_filaments(graph.edge_count(), &edge_lists)?;
        if cover_mode == CoverMode::Exact && labels.is_overlapping() {
            return Err(Error::Validation(
                "exact cover selects overlapping paths".into(),
            ));
        }
        let objective_value = evaluate(&selected, objective_kind, roughness_kind);
        Ok(Self {
            selected,
            labels,
            objective_value,
            objective_kind,
            roughness_kind,
            cover_mode,
            stats,
        })
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// Objective of a selection evaluated from the paths' cached roughness.
pub fn evaluate(selected: &[FilamentPath], objective: Objective, kind: RoughnessKind) -> f64 {
    let total: f64 = selected.iter().map(|p| p.roughness(kind)).sum();
    match objective {
        Objective::Total => total,
        Objective::Avg => total / selected.len() as f64,
    }
}

fn sets_of(pool: &PathPool) -> Vec<Vec<usize>> {
    pool.paths().iter().map(|p| p.edge_set()).collect()
}

fn costs_of(pool: &PathPool, kind: RoughnessKind) -> Vec<f64> {
    pool.paths().iter().map(|p| p.roughness(kind)).collect()
}

fn problem<'a>(
    graph: &WeightedGeometricGraph,
    sets: &'a [Vec<usize>],
    costs: &'a [f64],
    config: &SolverConfig,
) -> setcover::Problem<'a> {
    setcover::Problem {
        n_elems: graph.edge_count(),
        sets,
        costs,
        exact: config.cover_mode == CoverMode::Exact,
        node_limit: config.node_limit,
        opt_tol: config.opt_tol,
    }
}

fn stats(pool: &PathPool, nodes: u64, start: Instant, subproblems: usize) -> SolverStats {
    SolverStats {
        nodes_explored: nodes,
        pool_size: pool.len(),
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: pool.config().rng_seed,
        method: pool.method().name().to_string(),
        rng: RNG_NAME.to_string(),
        subproblems,
    }
}

fn cover_from(
    graph: &WeightedGeometricGraph,
    pool: &PathPool,
    chosen: &[usize],
    objective: Objective,
    config: &SolverConfig,
    stats: SolverStats,
) -> Result<FilamentCover> {
    let selected = chosen.iter().map(|&i| pool.paths()[i].clone()).collect();
    FilamentCover::new(
        graph,
        selected,
        objective,
        config.roughness_kind,
        config.cover_mode,
        stats,
    )
}

fn prepare(pool: &PathPool, graph: &WeightedGeometricGraph, config: &SolverConfig) -> Result<()> {
    config.validate()?;
    pool.check_graph(graph)
}

/// Greedy cover by roughness per newly covered edge. Feasible but not
/// necessarily optimal.
pub fn greedy_warm_start(
    pool: &PathPool,
    graph: &WeightedGeometricGraph,
    config: &SolverConfig,
) -> Result<FilamentCover> {
    prepare(pool, graph, config)?;
    let start = Instant::now();
    let (sets, costs) = (sets_of(pool), costs_of(pool, config.roughness_kind));
    let sol = setcover::greedy(&problem(graph, &sets, &costs, config))?;
    cover_from(
        graph,
        pool,
        &sol.chosen,
        config.objective,
        config,
        stats(pool, 0, start, 0),
    )
}

/// Minimum total roughness cover.
pub fn solve_total(
    pool: &PathPool,
    graph: &WeightedGeometricGraph,
    config: &SolverConfig,
) -> Result<FilamentCover> {
    prepare(pool, graph, config)?;
    let start = Instant::now();
    let (sets, costs) = (sets_of(pool), costs_of(pool, config.roughness_kind));
    let sol = setcover::solve(&problem(graph, &sets, &costs, config))?;
    cover_from(
        graph,
        pool,
        &sol.chosen,
        Objective::Total,
        config,
        stats(pool, sol.nodes, start, 1),
    )
}

/// Result of the parametric average-objective iteration over an arbitrary
/// set system.
#[derive(Debug, Clone)]
pub(crate) struct Fractional {
    pub chosen: Vec<usize>,
    pub nodes: u64,
    pub iterations: usize,
}

/// Minimizes `Σ c_s x_s / Σ x_s` given an oracle for `min Σ (c_s − λ) x_s`.
///
/// `oracle(λ)` returns an optimal selection for the shifted costs. The
/// iteration starts from `initial` (a feasible selection) when given,
/// otherwise from the optimum at `λ = 0`.
pub(crate) fn dinkelbach(
    costs: &[f64],
    initial: Option<Vec<usize>>,
    opt_tol: f64,
    mut oracle: impl FnMut(f64) -> Result<(Vec<usize>, u64)>,
) -> Result<Fractional> {
    let ratio = |x: &[usize]| x.iter().map(|&i| costs[i]).sum::<f64>() / x.len() as f64;
    let mut nodes = 0;
    let mut iterations = 0;
    let mut best = match initial {
        Some(x) => x,
        None => {
            let (x, n) = oracle(0.0)?;
            nodes += n;
            iterations += 1;
            x
        }
    };
    if best.is_empty() {
        return Err(Error::NumericalFailure(
            "empty selection in fractional program".into(),
        ));
    }
    let mut lambda = ratio(&best);
    while iterations < MAX_DINKELBACH_ITERATIONS {
        let (x, n) = oracle(lambda)?;
        nodes += n;
        iterations += 1;
        let shifted: f64 = x.iter().map(|&i| costs[i] - lambda).sum();
        let scale = x.iter().map(|&i| costs[i].abs()).sum::<f64>().max(1.0);
        if shifted >= -(opt_tol + 64.0 * f64::EPSILON * scale) || x.is_empty() {
            return Ok(Fractional {
                chosen: best,
                nodes,
                iterations,
            });
        }
        let r = ratio(&x);
        if r < lambda {
            lambda = r;
            best = x;
        } else {
            // The subproblem claimed improvement but the ratio did not
            // decrease: only possible through rounding.
            return Ok(Fractional {
                chosen: best,
                nodes,
                iterations,
            });
        }
    }
    Err(Error::NumericalFailure(format!(
        "average objective did not converge in {MAX_DINKELBACH_ITERATIONS} iterations"
    )))
}

/// Minimum average roughness cover.
pub fn solve_avg(
    pool: &PathPool,
    graph: &WeightedGeometricGraph,
    config: &SolverConfig,
) -> Result<FilamentCover> {
    prepare(pool, graph, config)?;
    let start = Instant::now();
    let (sets, costs) = (sets_of(pool), costs_of(pool, config.roughness_kind));
    let base = problem(graph, &sets, &costs, config);
    let initial = setcover::greedy(&base).ok().map(|s| s.chosen);
    let frac = dinkelbach(&costs, initial, config.opt_tol, |lambda| {
        let shifted: Vec<f64> = costs.iter().map(|c| c - lambda).collect();
        let sol = setcover::solve(&problem(graph, &sets, &shifted, config))?;
        Ok((sol.chosen, sol.nodes))
    })?;
    cover_from(
        graph,
        pool,
        &frac.chosen,
        Objective::Avg,
        config,
        stats(pool, frac.nodes, start, frac.iterations),
    )
}

/// Dispatches on the configured objective.
pub fn solve(
    pool: &PathPool,
    graph: &WeightedGeometricGraph,
    config: &SolverConfig,
) -> Result<FilamentCover> {
    match config.objective {
        Objective::Total => solve_total(pool, graph, config),
        Objective::Avg => solve_avg(pool, graph, config),
    }
}

/// Number of filaments of `initial` whose edge sets lie inside `path`.
pub fn contained_fragments(
    path: &FilamentPath,
    fragments: &[Vec<usize>],
    edge_fragments: &[Vec<u32>],
) -> usize {
    let set = path.edge_set();
    let mut candidates: Vec<u32> = path
        .edges()
        .iter()
        .flat_map(|&e| edge_fragments[e].iter().copied())
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    candidates
        .into_iter()
        .filter(|&f| {
            fragments[f as usize]
                .iter()
                .all(|e| set.binary_search(e).is_ok())
        })
        .count()
}

/// Merges an external fragmented decomposition into longer filaments.
///
/// Every pool path gets cost `r_p − 10⁴·k_p + 10⁸`, where `k_p` counts the
/// initial fragments contained in it, and an over-mode total-objective
/// cover is computed. The reported objective is the total roughness of the
/// chosen paths under the original costs.
pub fn postprocess_merge(
    graph: &WeightedGeometricGraph,
    initial: &EdgePartition,
    pool: &PathPool,
    config: &SolverConfig,
) -> Result<FilamentCover> {
    prepare(pool, graph, config)?;
    if initial.edge_count() != graph.edge_count() {
        return Err(Error::MismatchedEdgeSets {
            left: initial.edge_count(),
            right: graph.edge_count(),
        });
    }
    let start = Instant::now();
    let config = SolverConfig {
        cover_mode: CoverMode::Over,
        objective: Objective::Total,
        ..config.clone()
    };
    let filaments = initial.filaments();
    let index: std::collections::BTreeMap<u32, u32> = filaments
        .keys()
        .enumerate()
        .map(|(i, &l)| (l, i as u32))
        .collect();
    let fragments: Vec<Vec<usize>> = filaments.into_values().collect();
    let edge_fragments: Vec<Vec<u32>> = initial
        .all_labels()
        .iter()
        .map(|ls| ls.iter().map(|l| index[l]).collect())
        .collect();
    let sets = sets_of(pool);
    let costs: Vec<f64> = pool
        .paths()
        .iter()
        .map(|p| {
            p.roughness(config.roughness_kind)
                - FRAGMENT_DISCOUNT * contained_fragments(p, &fragments, &edge_fragments) as f64
                + PATH_OFFSET
        })
        .collect();
    let sol = setcover::solve(&problem(graph, &sets, &costs, &config))?;
    cover_from(
        graph,
        pool,
        &sol.chosen,
        Objective::Total,
        &config,
        stats(pool, sol.nodes, start, 1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeRecord;
    use crate::pool::{enumerate_all_paths, sample_bfs, SamplerConfig};

    fn graph(points: &[(f64, f64)], edges: &[(i64, i64, f64)]) -> WeightedGeometricGraph {
        let nodes = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| NodeRecord {
                id: i as i64,
                position: vec![x, y],
            })
            .collect();
        WeightedGeometricGraph::new(nodes, edges.to_vec()).unwrap()
    }

    fn line(weights: &[f64]) -> WeightedGeometricGraph {
        let pts: Vec<(f64, f64)> = (0..=weights.len()).map(|i| (i as f64, 0.0)).collect();
        let edges: Vec<_> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (i as i64, i as i64 + 1, w))
            .collect();
        graph(&pts, &edges)
    }

    fn star() -> WeightedGeometricGraph {
        graph(
            &[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)],
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)],
        )
    }

    fn config(mode: CoverMode, objective: Objective) -> SolverConfig {
        SolverConfig {
            cover_mode: mode,
            objective,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn straight_line_selects_whole_path() {
        let g = line(&[1.0, 1.0, 1.0]);
        let pool = enumerate_all_paths(&g, 1000).unwrap();
        let cover = solve_total(&pool, &g, &config(CoverMode::Over, Objective::Total)).unwrap();
        assert_eq!(cover.len(), 1);
        assert_eq!(cover.objective_value, 0.0);
        assert_eq!(cover.selected[0].len(), 3);
    }

    #[test]
    fn star_exact_cover() {
        let g = star();
        let pool = enumerate_all_paths(&g, 1000).unwrap();
        let cover = solve_total(&pool, &g, &config(CoverMode::Exact, Objective::Total)).unwrap();
        assert!((cover.objective_value - 1.0).abs() < 1e-12);
        assert_eq!(cover.len(), 2);
        assert!(!cover.labels.is_overlapping());
    }

    #[test]
    fn single_edge_avg() {
        let g = line(&[1.0]);
        let pool = enumerate_all_paths(&g, 10).unwrap();
        let cover = solve_avg(&pool, &g, &config(CoverMode::Exact, Objective::Avg)).unwrap();
        assert_eq!(cover.objective_value, 1.0);
    }

    #[test]
    fn avg_on_weighted_line_matches_enumeration() {
        let g = line(&[1.0, 2.0, 4.0]);
        let pool = enumerate_all_paths(&g, 100).unwrap();
        for mode in [CoverMode::Exact, CoverMode::Over] {
            for kind in [RoughnessKind::Pair, RoughnessKind::All] {
                let cfg = SolverConfig {
                    roughness_kind: kind,
                    ..config(mode, Objective::Avg)
                };
                let cover = solve_avg(&pool, &g, &cfg).unwrap();
                let n = pool.len();
                let mut best = f64::INFINITY;
                for mask in 1u32..(1 << n) {
                    let mut count = [0; 3];
                    let (mut sum, mut k) = (0.0, 0.0);
                    for (i, p) in pool.paths().iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            sum += p.roughness(kind);
                            k += 1.0;
                            for &e in p.edges() {
                                count[e] += 1;
                            }
                        }
                    }
                    let ok = count.iter().all(|&c| {
                        if mode == CoverMode::Exact {
                            c == 1
                        } else {
                            c >= 1
                        }
                    });
                    if ok {
                        best = best.min(sum / k);
                    }
                }
                assert!(
                    (cover.objective_value - best).abs() < 1e-9,
                    "{mode:?} {kind:?}"
                );
            }
        }
    }

    #[test]
    fn greedy_on_single_edges_and_zero_ratio() {
        let g = line(&[1.0, 2.0, 4.0]);
        let pool = PathPool::single_edges(&g, SamplerConfig::default()).unwrap();
        let cover = greedy_warm_start(&pool, &g, &SolverConfig::default()).unwrap();
        assert_eq!(cover.len(), 3);
        assert_eq!(cover.objective_value, 7.0);
        let flat = line(&[1.0, 1.0, 1.0]);
        let pool = enumerate_all_paths(&flat, 100).unwrap();
        let cover = greedy_warm_start(&pool, &flat, &SolverConfig::default()).unwrap();
        assert_eq!(cover.len(), 1);
        assert_eq!(cover.selected[0].len(), 3);
    }

    #[test]
    fn exact_infeasible_pool() {
        // The two 2-edge paths of a 3-edge line share the middle edge, so
        // no partition exists. Pools always hold single edges, so the
        // program is posed directly.
        let g = line(&[1.0, 1.0, 1.0]);
        let sets = vec![vec![0, 1], vec![1, 2]];
        let costs = vec![0.0, 0.0];
        let exact = config(CoverMode::Exact, Objective::Total);
        assert!(matches!(
            setcover::solve(&problem(&g, &sets, &costs, &exact)),
            Err(Error::InfeasibleExactCover { .. })
        ));
        let over = config(CoverMode::Over, Objective::Total);
        assert!(setcover::solve(&problem(&g, &sets, &costs, &over)).is_ok());
    }

    #[test]
    fn merge_prefers_concatenation() {
        let g = line(&[1.0, 1.0, 1.0, 1.0]);
        let pool = enumerate_all_paths(&g, 1000).unwrap();
        let fragments = EdgePartition::from_assignment(&[0, 0, 1, 1]);
        let cover = postprocess_merge(&g, &fragments, &pool, &SolverConfig::default()).unwrap();
        assert_eq!(cover.len(), 1);
        assert_eq!(cover.selected[0].len(), 4);
        assert_eq!(cover.objective_value, 0.0);
    }

    #[test]
    fn merge_keeps_true_filaments() {
        // Two weight levels along a line; fragments equal the levels.
        let g = line(&[1.0, 1.0, 3.0, 3.0]);
        let pool = enumerate_all_paths(&g, 1000).unwrap();
        let truth = EdgePartition::from_assignment(&[0, 0, 1, 1]);
        let cover = postprocess_merge(&g, &truth, &pool, &SolverConfig::default()).unwrap();
        // The whole line contains both fragments and wins via the offset.
        assert_eq!(cover.len(), 1);
        // With an elbow between the two levels the whole path is not in a
        // BFS pool, so the fragments are reproduced.
        let g = graph(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (2.0, 2.0)],
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 3.0), (3, 4, 3.0)],
        );
        let pool = sample_bfs(&g, &SamplerConfig::default()).unwrap();
        let truth = EdgePartition::from_assignment(&[0, 0, 1, 1]);
        let cover = postprocess_merge(&g, &truth, &pool, &SolverConfig::default()).unwrap();
        assert_eq!(cover.labels, truth);
    }

    #[test]
    fn labels_follow_size_then_edges() {
        let g = line(&[1.0, 5.0, 5.0]);
        let pool = enumerate_all_paths(&g, 100).unwrap();
        let cover = solve_total(&pool, &g, &config(CoverMode::Exact, Objective::Total)).unwrap();
        assert_eq!(cover.selected[0].edge_set(), vec![1, 2]);
        assert_eq!(cover.labels, EdgePartition::from_assignment(&[1, 0, 0]));
    }

    #[test]
    fn pool_from_other_graph_is_rejected() {
        let pool = enumerate_all_paths(&line(&[1.0]), 10).unwrap();
        assert!(matches!(
            solve_total(&pool, &star(), &SolverConfig::default()),
            Err(Error::GraphMismatch)
        ));
    }
}
