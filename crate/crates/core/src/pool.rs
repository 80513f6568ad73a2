//! Candidate path pools: angle-bounded breadth-first enumeration and
//! random-minimum-spanning-tree sampling.
//!
//! Every pool contains all single-edge paths, holds each path in its
//! canonical orientation and is sorted by canonical edge sequence, so a
//! pool is a deterministic function of graph, sampler and seed.

use std::collections::{HashSet, VecDeque};

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGeometricGraph;
use crate::roughness::{angle_between, direction, FilamentPath};

/// Name of the random generator used for all sampling.
pub const RNG_NAME: &str = "ChaCha8";

/// Parameters shared by the path samplers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub angle_threshold_deg: f64,
    pub rmst_trees: usize,
    pub max_paths: usize,
    pub rng_seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            angle_threshold_deg: 60.0,
            rmst_trees: 100,
            max_paths: 5_000_000,
            rng_seed: 1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self, graph: &WeightedGeometricGraph) -> Result<()> {
        if !(self.angle_threshold_deg > 0.0 && self.angle_threshold_deg <= 180.0) {
            return Err(Error::Config(format!(
                "angle threshold {} outside (0, 180]",
                self.angle_threshold_deg
            )));
        }
        if self.rmst_trees == 0 {
            return Err(Error::Config(
                "at least one spanning tree is required".into(),
            ));
        }
        if self.max_paths < graph.edge_count() {
            return Err(Error::Config(format!(
                "max_paths {} is below the edge count {}",
                self.max_paths,
                graph.edge_count()
            )));
        }
        Ok(())
    }
}

/// How a pool was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolMethod {
    Bfs,
    Rmst,
    /// Union of pools from different samplers.
    Mixed,
    /// Every edge-simple path of the graph.
    Exhaustive,
    /// Single-edge paths only.
    Single,
}

impl PoolMethod {
    pub fn name(self) -> &'static str {
        match self {
            PoolMethod::Bfs => "bfs",
            PoolMethod::Rmst => "rmst",
            PoolMethod::Mixed => "mixed",
            PoolMethod::Exhaustive => "exhaustive",
            PoolMethod::Single => "single",
        }
    }
}

/// Deduplicated, canonically sorted set of candidate paths.
#[derive(Debug, Clone)]
pub struct PathPool {
    paths: Vec<FilamentPath>,
    method: PoolMethod,
    config: SamplerConfig,
    coverage_ok: bool,
    graph_fingerprint: u64,
}

impl PathPool {
    /// Builds a pool from arbitrary paths: adds single edges, orients every
    /// path canonically, drops duplicates and sorts.
    pub fn from_paths(
        graph: &WeightedGeometricGraph,
        paths: impl IntoIterator<Item = FilamentPath>,
        method: PoolMethod,
        config: SamplerConfig,
    ) -> Result<Self> {
        let mut collector = Collector::new(config.max_paths);
        for p in paths {
            collector.push(graph, p)?;
        }
        collector.finish(graph, method, config)
    }

    /// Pool holding only the single-edge paths.
    pub fn single_edges(graph: &WeightedGeometricGraph, config: SamplerConfig) -> Result<Self> {
        Self::from_paths(graph, std::iter::empty(), PoolMethod::Single, config)
    }

    pub fn paths(&self) -> &[FilamentPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn method(&self) -> PoolMethod {
        self.method
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    /// True iff every graph edge lies on some pool path.
    pub fn coverage_ok(&self) -> bool {
        self.coverage_ok
    }

    /// Fingerprint of the graph the pool was built on.
    pub fn graph_fingerprint(&self) -> u64 {
        self.graph_fingerprint
    }

    /// Fails unless the pool was built on `graph`.
    pub fn check_graph(&self, graph: &WeightedGeometricGraph) -> Result<()> {
        if graph.fingerprint() != self.graph_fingerprint {
            return Err(Error::GraphMismatch);
        }
        Ok(())
    }
}

struct Collector {
    seen: HashSet<Vec<usize>>,
    paths: Vec<FilamentPath>,
    cap: usize,
}

impl Collector {
    fn new(cap: usize) -> Self {
        Self {
            seen: HashSet::new(),
            paths: Vec::new(),
            cap,
        }
    }

    fn push(&mut self, graph: &WeightedGeometricGraph, path: FilamentPath) -> Result<()> {
        let path = path.best_rotation(graph)?;
        if self.seen.insert(path.edges().to_vec()) {
            if self.paths.len() >= self.cap {
                return Err(Error::PoolExplosion { cap: self.cap });
            }
            self.paths.push(path);
        }
        Ok(())
    }

    fn finish(
        mut self,
        graph: &WeightedGeometricGraph,
        method: PoolMethod,
        config: SamplerConfig,
    ) -> Result<PathPool> {
        for e in 0..graph.edge_count() {
            self.push(graph, FilamentPath::from_edges(graph, vec![e])?)?;
        }
        let mut covered = vec![false; graph.edge_count()];
        for p in &self.paths {
            for &e in p.edges() {
                covered[e] = true;
            }
        }
        self.paths.sort_by(|a, b| a.edges().cmp(b.edges()));
        Ok(PathPool {
            paths: self.paths,
            method,
            config,
            coverage_ok: covered.into_iter().all(|c| c),
            graph_fingerprint: graph.fingerprint(),
        })
    }
}

/// Angle-bounded breadth-first path enumeration.
///
/// Paths are grown from every node along every incident edge. An extension
/// is admitted only if its deflection from the previous edge is below the
/// threshold. A walk that returns to its start node is recorded as a cyclic
/// path if the wrap-around deflection also passes; growth continues past it
/// either way.
pub fn sample_bfs(graph: &WeightedGeometricGraph, config: &SamplerConfig) -> Result<PathPool> {
    config.validate(graph)?;
    if !graph.is_geometric() {
        return Err(Error::MissingCoordinates(
            "BFS sampling needs node positions".into(),
        ));
    }
    let threshold = config.angle_threshold_deg;
    let mut collector = Collector::new(config.max_paths);

    struct Partial {
        edges: Vec<usize>,
        nodes: Vec<usize>,
        dirs: Vec<Vec<f64>>,
    }
    let mut queue = VecDeque::new();
    for start in 0..graph.node_count() {
        for &(next, e) in graph.incident(start) {
            let d = direction(graph, start, next);
            angle_between(&d, &d)?;
            queue.push_back(Partial {
                edges: vec![e],
                nodes: vec![start, next],
                dirs: vec![d],
            });
        }
    }
    while let Some(p) = queue.pop_front() {
        let at = *p.nodes.last().expect("nonempty");
        let start = p.nodes[0];
        if p.edges.len() == 1 {
            collector.push(
                graph,
                FilamentPath::new(graph, p.edges.clone(), p.nodes.clone(), false)?,
            )?;
        } else if at == start {
            if p.edges.len() >= 3
                && angle_between(p.dirs.last().expect("nonempty"), &p.dirs[0])? < threshold
            {
                collector.push(
                    graph,
                    FilamentPath::new(graph, p.edges.clone(), p.nodes.clone(), true)?,
                )?;
            }
        } else {
            collector.push(
                graph,
                FilamentPath::new(graph, p.edges.clone(), p.nodes.clone(), false)?,
            )?;
        }
        let last_dir = p.dirs.last().expect("nonempty");
        for &(next, e) in graph.incident(at) {
            if p.edges.contains(&e) {
                continue;
            }
            let d = direction(graph, at, next);
            if angle_between(last_dir, &d)? >= threshold {
                continue;
            }
            let mut q = Partial {
                edges: p.edges.clone(),
                nodes: p.nodes.clone(),
                dirs: p.dirs.clone(),
            };
            q.edges.push(e);
            q.nodes.push(next);
            q.dirs.push(d);
            queue.push_back(q);
        }
        // Every partial path is eventually recorded, so the queue cannot
        // outgrow twice the cap (each path is found from both ends) plus
        // cyclic rotations; check eagerly to fail fast.
        if queue.len() > config.max_paths.saturating_mul(4) {
            return Err(Error::PoolExplosion {
                cap: config.max_paths,
            });
        }
    }
    collector.finish(graph, PoolMethod::Bfs, config.clone())
}

/// Random-minimum-spanning-tree sampling.
///
/// Each iteration draws i.i.d. uniform(0,1) surrogate weights, builds a
/// minimum spanning forest with Kruskal's algorithm (ties broken by edge id)
/// and adds the path between every pair of nodes in the same tree.
pub fn sample_rmst(graph: &WeightedGeometricGraph, config: &SamplerConfig) -> Result<PathPool> {
    config.validate(graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut collector = Collector::new(config.max_paths);
    let n = graph.node_count();
    for _ in 0..config.rmst_trees {
        let surrogate: Vec<f64> = (0..graph.edge_count())
            .map(|_| rng.random::<f64>())
            .collect();
        let mut order: Vec<usize> = (0..graph.edge_count()).collect();
        order.sort_by(|&a, &b| surrogate[a].total_cmp(&surrogate[b]).then(a.cmp(&b)));
        let mut uf = UnionFind::<usize>::new(n);
        let mut tree_adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for e in order {
            let (a, b) = graph.edge(e).endpoints();
            if uf.union(a, b) {
                tree_adj[a].push((b, e));
                tree_adj[b].push((a, e));
            }
        }
        for s in 0..n {
            // Depth-first walk of the tree from s; record paths to higher nodes.
            let mut stack: Vec<(usize, usize, usize)> =
                tree_adj[s].iter().map(|&(m, e)| (m, e, 1)).collect();
            let mut edges: Vec<usize> = Vec::new();
            let mut nodes: Vec<usize> = vec![s];
            while let Some((node, e, depth)) = stack.pop() {
                edges.truncate(depth - 1);
                nodes.truncate(depth);
                edges.push(e);
                nodes.push(node);
                if node > s {
                    collector.push(
                        graph,
                        FilamentPath::new(graph, edges.clone(), nodes.clone(), false)?,
                    )?;
                }
                let parent = nodes[depth - 1];
                for &(m, f) in &tree_adj[node] {
                    if m != parent {
                        stack.push((m, f, depth + 1));
                    }
                }
            }
        }
    }
    collector.finish(graph, PoolMethod::Rmst, config.clone())
}

/// Every edge-simple path of the graph, with no angle criterion. Closed
/// walks are flagged cyclic. Intended for small graphs.
pub fn enumerate_all_paths(graph: &WeightedGeometricGraph, max_paths: usize) -> Result<PathPool> {
    let config = SamplerConfig {
        max_paths,
        ..SamplerConfig::default()
    };
    let mut collector = Collector::new(max_paths);
    fn grow(
        graph: &WeightedGeometricGraph,
        edges: &mut Vec<usize>,
        nodes: &mut Vec<usize>,
        collector: &mut Collector,
    ) -> Result<()> {
        let at = *nodes.last().expect("nonempty");
        let cyclic = edges.len() >= 3 && at == nodes[0];
        collector.push(
            graph,
            FilamentPath::new(graph, edges.clone(), nodes.clone(), cyclic)?,
        )?;
        for &(next, e) in graph.incident(at) {
            if edges.contains(&e) {
                continue;
            }
            edges.push(e);
            nodes.push(next);
            grow(graph, edges, nodes, collector)?;
            edges.pop();
            nodes.pop();
        }
        Ok(())
    }
    for start in 0..graph.node_count() {
        for &(next, e) in graph.incident(start) {
            grow(graph, &mut vec![e], &mut vec![start, next], &mut collector)?;
        }
    }
    collector.finish(graph, PoolMethod::Exhaustive, config)
}

/// Deduplicated union of two pools over the same graph.
pub fn pool_union(graph: &WeightedGeometricGraph, a: &PathPool, b: &PathPool) -> Result<PathPool> {
    a.check_graph(graph)?;
    b.check_graph(graph)?;
    let config = SamplerConfig {
        max_paths: a.config.max_paths.max(b.config.max_paths),
        ..a.config.clone()
    };
    let paths = a.paths.iter().chain(&b.paths).cloned();
    PathPool::from_paths(graph, paths, PoolMethod::Mixed, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeRecord;

    fn graph(points: &[(f64, f64)], edges: &[(i64, i64)]) -> WeightedGeometricGraph {
        let nodes = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| NodeRecord {
                id: i as i64,
                position: vec![x, y],
            })
            .collect();
        WeightedGeometricGraph::new(nodes, edges.iter().map(|&(a, b)| (a, b, 1.0)).collect())
            .unwrap()
    }

    fn line3() -> WeightedGeometricGraph {
        graph(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
            &[(0, 1), (1, 2), (2, 3)],
        )
    }

    fn square() -> WeightedGeometricGraph {
        graph(
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
            &[(0, 1), (1, 2), (2, 3), (0, 3)],
        )
    }

    fn seqs(pool: &PathPool) -> Vec<Vec<usize>> {
        pool.paths().iter().map(|p| p.edges().to_vec()).collect()
    }

    #[test]
    fn bfs_on_straight_line_finds_all_subpaths() {
        let pool = sample_bfs(&line3(), &SamplerConfig::default()).unwrap();
        assert_eq!(
            seqs(&pool),
            vec![
                vec![0],
                vec![0, 1],
                vec![0, 1, 2],
                vec![1],
                vec![1, 2],
                vec![2]
            ]
        );
        assert!(pool.coverage_ok());
    }

    #[test]
    fn bfs_rejects_elbow() {
        let g = graph(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)], &[(0, 1), (1, 2)]);
        let pool = sample_bfs(&g, &SamplerConfig::default()).unwrap();
        assert_eq!(seqs(&pool), vec![vec![0], vec![1]]);
    }

    #[test]
    fn bfs_finds_square_cycle_with_relaxed_threshold() {
        let config = SamplerConfig {
            angle_threshold_deg: 91.0,
            ..SamplerConfig::default()
        };
        let pool = sample_bfs(&square(), &config).unwrap();
        let cycles: Vec<_> = pool.paths().iter().filter(|p| p.is_cyclic()).collect();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].len(), 4);
        let strict = sample_bfs(&square(), &SamplerConfig::default()).unwrap();
        assert_eq!(strict.len(), 4);
    }

    #[test]
    fn pool_cap_is_a_hard_error() {
        let config = SamplerConfig {
            max_paths: 4,
            ..SamplerConfig::default()
        };
        assert!(matches!(
            sample_bfs(&line3(), &config),
            Err(Error::PoolExplosion { cap: 4 })
        ));
        assert!(matches!(
            enumerate_all_paths(&line3(), 5),
            Err(Error::PoolExplosion { cap: 5 })
        ));
    }

    #[test]
    fn rmst_on_tree_is_seed_independent() {
        let g = graph(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (1.0, 1.0), (1.0, -1.0)],
            &[(0, 1), (1, 2), (1, 3), (1, 4)],
        );
        let base = SamplerConfig {
            rmst_trees: 1,
            ..SamplerConfig::default()
        };
        let a = sample_rmst(&g, &base).unwrap();
        let b = sample_rmst(
            &g,
            &SamplerConfig {
                rng_seed: 99,
                rmst_trees: 7,
                ..base
            },
        )
        .unwrap();
        assert_eq!(seqs(&a), seqs(&b));
        // 5 nodes → 10 node pairs, each joined by one tree path.
        assert_eq!(a.len(), 10);
    }

    #[test]
    fn rmst_on_cycle_never_closes_it() {
        let pool = sample_rmst(&square(), &SamplerConfig::default()).unwrap();
        assert!(pool.paths().iter().all(|p| p.len() < 4 && !p.is_cyclic()));
        let three: Vec<_> = pool
            .paths()
            .iter()
            .filter(|p| p.len() == 3)
            .map(|p| p.edge_set())
            .collect();
        assert_eq!(three.len(), 4, "each dropped edge yields one 3-edge path");
        assert!(pool.paths().iter().filter(|p| p.len() == 1).count() == 4);
    }

    #[test]
    fn rmst_is_deterministic() {
        let a = sample_rmst(&square(), &SamplerConfig::default()).unwrap();
        let b = sample_rmst(&square(), &SamplerConfig::default()).unwrap();
        assert_eq!(seqs(&a), seqs(&b));
    }

    #[test]
    fn union_laws() {
        let g = square();
        let config = SamplerConfig {
            angle_threshold_deg: 91.0,
            ..SamplerConfig::default()
        };
        let bfs = sample_bfs(&g, &config).unwrap();
        let single = PathPool::single_edges(&g, config.clone()).unwrap();
        assert_eq!(seqs(&pool_union(&g, &bfs, &bfs).unwrap()), seqs(&bfs));
        let u = pool_union(&g, &single, &bfs).unwrap();
        assert_eq!(seqs(&u), seqs(&bfs));
        assert_eq!(u.method(), PoolMethod::Mixed);
        let rmst = sample_rmst(&g, &config).unwrap();
        let u = pool_union(&g, &bfs, &rmst).unwrap();
        let a: HashSet<_> = seqs(&bfs).into_iter().collect();
        let b: HashSet<_> = seqs(&rmst).into_iter().collect();
        assert_eq!(u.len(), a.union(&b).count());
        assert!(u.len() <= bfs.len() + rmst.len());
    }

    #[test]
    fn union_rejects_different_graphs() {
        let a = PathPool::single_edges(&square(), SamplerConfig::default()).unwrap();
        let b = PathPool::single_edges(&line3(), SamplerConfig::default()).unwrap();
        assert!(matches!(
            pool_union(&square(), &a, &b),
            Err(Error::GraphMismatch)
        ));
    }

    #[test]
    fn exhaustive_on_square() {
        let pool = enumerate_all_paths(&square(), 1000).unwrap();
        // 4 singles, 4 two-edge, 4 three-edge and the cycle once.
        assert_eq!(pool.len(), 13);
        assert_eq!(pool.paths().iter().filter(|p| p.is_cyclic()).count(), 1);
    }
}
