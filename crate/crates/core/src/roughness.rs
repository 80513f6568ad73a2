//! Path-quality functionals and the filament path type.
//!
//! Three functionals are provided: the mean absolute difference of
//! consecutive edge weights (`pair`), the normalized spread of all weights
//! (`all`), and the largest deflection angle between consecutive edges
//! (`angle`, in degrees). Edge directions follow the path's node sequence.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGeometricGraph;

/// Weight-based roughness functional used as the cover cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RoughnessKind {
    Pair,
    All,
}

impl RoughnessKind {
    pub fn name(self) -> &'static str {
        match self {
            RoughnessKind::Pair => "pair",
            RoughnessKind::All => "all",
        }
    }

    /// Evaluates the functional on a sequence of edge weights.
    pub fn of_weights(self, weights: &[f64]) -> f64 {
        match self {
            RoughnessKind::Pair => pair_of_weights(weights),
            RoughnessKind::All => all_of_weights(weights),
        }
    }
}

/// Mean absolute consecutive difference, or the weight itself for a single
/// edge. The differences are summed in sorted order so the value is
/// bit-identical for a sequence and its reverse.
pub fn pair_of_weights(weights: &[f64]) -> f64 {
    assert!(!weights.is_empty(), "roughness of an empty path");
    if weights.len() == 1 {
        return weights[0];
    }
    let mut diffs: Vec<f64> = weights.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    diffs.sort_by(f64::total_cmp);
    diffs.iter().sum::<f64>() / (weights.len() - 1) as f64
}

/// Largest pairwise weight difference divided by `P - 1`, or the weight
/// itself for a single edge.
pub fn all_of_weights(weights: &[f64]) -> f64 {
    assert!(!weights.is_empty(), "roughness of an empty path");
    if weights.len() == 1 {
        return weights[0];
    }
    let (lo, hi) = weights
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| {
            (lo.min(w), hi.max(w))
        });
    (hi - lo) / (weights.len() - 1) as f64
}

/// Angle in degrees between two direction vectors.
pub fn angle_between(a: &[f64], b: &[f64]) -> Result<f64> {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateGeometry("zero-length edge".into()));
    }
    // 2·atan2(|â−b̂|, |â+b̂|) stays accurate near 0° and 180°, unlike acos.
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (u, v) = (x / na, y / nb);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    Ok((2.0 * diff.sqrt().atan2(sum.sqrt())).to_degrees())
}

/// Direction of the step from node `from` to node `to`.
pub(crate) fn direction(graph: &WeightedGeometricGraph, from: usize, to: usize) -> Vec<f64> {
    graph
        .position(to)
        .iter()
        .zip(graph.position(from))
        .map(|(b, a)| b - a)
        .collect()
}

/// An edge-simple walk through the graph with cached roughness values.
///
/// `nodes` holds node indices (not user ids) and has one more entry than
/// `edges`. A cyclic path starts and ends at the same node; its angle
/// roughness includes the deflection between the last and first edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FilamentPath {
    edges: Vec<usize>,
    nodes: Vec<usize>,
    cyclic: bool,
    r_pair: f64,
    r_all: f64,
    r_angle: Option<f64>,
}

impl FilamentPath {
    /// Validates a walk and caches its roughness values. The angle cache is
    /// empty for non-geometric graphs.
    pub fn new(
        graph: &WeightedGeometricGraph,
        edges: Vec<usize>,
        nodes: Vec<usize>,
        cyclic: bool,
    ) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Validation("empty path".into()));
        }
        if nodes.len() != edges.len() + 1 {
            return Err(Error::Validation(format!(
                "path with {} edges needs {} nodes, got {}",
                edges.len(),
                edges.len() + 1,
                nodes.len()
            )));
        }
        let mut seen = edges.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("path repeats an edge".into()));
        }
        for (i, &e) in edges.iter().enumerate() {
            if e >= graph.edge_count() {
                return Err(Error::Validation(format!(
                    "path references unknown edge {e}"
                )));
            }
            let (a, b) = graph.edge(e).endpoints();
            let (u, v) = (nodes[i], nodes[i + 1]);
            if !((a == u && b == v) || (a == v && b == u)) {
                return Err(Error::Validation(format!(
                    "edge {e} does not join path nodes {u} and {v}"
                )));
            }
        }
        if cyclic && (nodes[0] != nodes[nodes.len() - 1] || edges.len() < 3) {
            return Err(Error::Validation("cyclic flag on an open path".into()));
        }
        let weights: Vec<f64> = edges.iter().map(|&e| graph.weight(e)).collect();
        let mut path = Self {
            r_pair: pair_of_weights(&weights),
            r_all: all_of_weights(&weights),
            r_angle: None,
            edges,
            nodes,
            cyclic,
        };
        if graph.is_geometric() {
            path.r_angle = Some(path.evaluate_angle(graph)?);
        }
        Ok(path)
    }

    /// Builds a path from an edge sequence, inferring the node sequence.
    /// A single edge is oriented from its lower to its higher node index.
    /// Paths that return to their start node are flagged cyclic.
    pub fn from_edges(graph: &WeightedGeometricGraph, edges: Vec<usize>) -> Result<Self> {
        let Some(&first) = edges.first() else {
            return Err(Error::Validation("empty path".into()));
        };
        if let Some(&e) = edges.iter().find(|&&e| e >= graph.edge_count()) {
            return Err(Error::Validation(format!(
                "path references unknown edge {e}"
            )));
        }
        let (a, b) = graph.edge(first).endpoints();
        let start = match edges.get(1) {
            None => a,
            Some(&next) => {
                if graph.edge(next).touches(b) {
                    a
                } else {
                    b
                }
            }
        };
        let mut nodes = vec![start];
        let mut at = start;
        for &e in &edges {
            if !graph.edge(e).touches(at) {
                return Err(Error::Validation(format!(
                    "edge {e} is not adjacent to the previous edge"
                )));
            }
            at = graph.edge(e).other(at);
            nodes.push(at);
        }
        let cyclic = edges.len() >= 3 && nodes[0] == at;
        Self::new(graph, edges, nodes, cyclic)
    }

    fn evaluate_angle(&self, graph: &WeightedGeometricGraph) -> Result<f64> {
        let dirs: Vec<Vec<f64>> = self
            .nodes
            .windows(2)
            .map(|w| direction(graph, w[0], w[1]))
            .collect();
        let mut worst = 0.0f64;
        for pair in dirs.windows(2) {
            worst = worst.max(angle_between(&pair[0], &pair[1])?);
        }
        if dirs.len() == 1 {
            angle_between(&dirs[0], &dirs[0])?;
        }
        if self.cyclic {
            worst = worst.max(angle_between(&dirs[dirs.len() - 1], &dirs[0])?);
        }
        Ok(worst)
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// Node indices along the path.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// User-facing node identifiers along the path.
    pub fn node_ids(&self, graph: &WeightedGeometricGraph) -> Vec<i64> {
        self.nodes.iter().map(|&n| graph.node(n).id).collect()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn r_pair(&self) -> f64 {
        self.r_pair
    }

    pub fn r_all(&self) -> f64 {
        self.r_all
    }

    /// Cached angle roughness; `None` on non-geometric graphs.
    pub fn r_angle(&self) -> Option<f64> {
        self.r_angle
    }

    pub fn roughness(&self, kind: RoughnessKind) -> f64 {
        match kind {
            RoughnessKind::Pair => self.r_pair,
            RoughnessKind::All => self.r_all,
        }
    }

    /// Sorted edge ids.
    pub fn edge_set(&self) -> Vec<usize> {
        let mut s = self.edges.clone();
        s.sort_unstable();
        s
    }

    /// The path traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut p = self.clone();
        p.edges.reverse();
        p.nodes.reverse();
        p
    }

    /// Lexicographically smaller of the forward and reverse edge sequences.
    pub fn canonical_edges(&self) -> Vec<usize> {
        let rev: Vec<usize> = self.edges.iter().rev().copied().collect();
        if rev < self.edges {
            rev
        } else {
            self.edges.clone()
        }
    }

    /// The same path oriented so that its edge sequence is canonical. A
    /// single edge is oriented from its lower to its higher node index.
    pub fn canonical(self) -> Self {
        if self.edges.len() == 1 {
            if self.nodes[0] > self.nodes[1] {
                return self.reversed();
            }
            return self;
        }
        let rev_smaller = self.edges.iter().rev().lt(self.edges.iter());
        if rev_smaller {
            self.reversed()
        } else {
            self
        }
    }

    /// For a closed path, the rotation and direction with the least pair
    /// roughness, ties broken by the smaller edge sequence. Every rotation
    /// of a loop covers the same edges, so pools keep only this one. Open
    /// paths are returned in canonical orientation.
    pub fn best_rotation(self, graph: &WeightedGeometricGraph) -> Result<Self> {
        if !self.cyclic {
            return Ok(self.canonical());
        }
        let n = self.edges.len();
        let mut best: Option<Self> = None;
        for forward in [self.clone(), self.reversed()] {
            for s in 0..n {
                let edges: Vec<usize> = forward.edges[s..]
                    .iter()
                    .chain(&forward.edges[..s])
                    .copied()
                    .collect();
                let nodes: Vec<usize> = forward.nodes[s..n]
                    .iter()
                    .chain(&forward.nodes[..=s])
                    .copied()
                    .collect();
                let candidate = Self::new(graph, edges, nodes, true)?;
                let better = match &best {
                    None => true,
                    Some(b) => candidate
                        .r_pair
                        .total_cmp(&b.r_pair)
                        .then_with(|| candidate.edges.cmp(&b.edges))
                        .is_lt(),
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
        Ok(best.expect("cycle has edges"))
    }

    /// Ordering by canonical edge sequence.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.canonical_edges().cmp(&other.canonical_edges())
    }
}

/// Pairwise roughness of a path on a graph.
pub fn roughness_pair(path: &FilamentPath, graph: &WeightedGeometricGraph) -> f64 {
    let w: Vec<f64> = path.edges.iter().map(|&e| graph.weight(e)).collect();
    pair_of_weights(&w)
}

/// All-to-all roughness of a path on a graph.
pub fn roughness_all(path: &FilamentPath, graph: &WeightedGeometricGraph) -> f64 {
    let w: Vec<f64> = path.edges.iter().map(|&e| graph.weight(e)).collect();
    all_of_weights(&w)
}

/// Largest deflection angle in degrees along a path (0 for a single edge).
pub fn roughness_angle(path: &FilamentPath, graph: &WeightedGeometricGraph) -> Result<f64> {
    if !graph.is_geometric() {
        return Err(Error::MissingCoordinates(
            "angle roughness needs node positions".into(),
        ));
    }
    path.evaluate_angle(graph)
}
