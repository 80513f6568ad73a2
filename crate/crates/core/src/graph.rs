//! Weighted geometric graph model, edge partitions and the line-graph
//! transform.
//!
//! Nodes are stored sorted by their identifier and edges are stored sorted
//! by their endpoint identifiers, so the integer edge id of an edge is
//! stable for a given node/edge set regardless of input order.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// A node with a user-facing identifier and an optional position.
///
/// `position` is empty for graphs loaded in non-geometric mode.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub id: i64,
    pub position: Vec<f64>,
}

/// An undirected edge between two node indices (`source < target`).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
    pub euclidean_length: f64,
}

impl EdgeRecord {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.source, self.target)
    }

    /// The endpoint opposite to `node`.
    pub fn other(&self, node: usize) -> usize {
        if node == self.source {
            self.target
        } else {
            self.source
        }
    }

    pub fn touches(&self, node: usize) -> bool {
        self.source == node || self.target == node
    }
}

/// Undirected simple graph with strictly positive edge weights and
/// (optionally) node coordinates of a common dimension.
#[derive(Debug, Clone)]
pub struct WeightedGeometricGraph {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    dimension: Option<usize>,
    adjacency: Vec<Vec<(usize, usize)>>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

impl WeightedGeometricGraph {
    /// Builds and validates a graph from node records and `(source id,
    /// target id, weight)` triples.
    pub fn new(mut nodes: Vec<NodeRecord>, edges: Vec<(i64, i64, f64)>) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::Validation(format!(
                    "duplicate node id {}",
                    pair[0].id
                )));
            }
        }

        let with_coords = nodes.iter().filter(|n| !n.position.is_empty()).count();
        let dimension = if with_coords == 0 {
            None
        } else if with_coords != nodes.len() {
            let missing = nodes.iter().find(|n| n.position.is_empty()).map(|n| n.id);
            return Err(Error::MissingCoordinates(format!(
                "node {} has no coordinates while others do",
                missing.unwrap_or_default()
            )));
        } else {
            let dim = nodes[0].position.len();
            if !(2..=3).contains(&dim) {
                return Err(Error::Validation(format!("unsupported dimension {dim}")));
            }
            for n in &nodes {
                if n.position.len() != dim {
                    return Err(Error::Validation(format!(
                        "node {} has {} coordinates, expected {dim}",
                        n.id,
                        n.position.len()
                    )));
                }
                if n.position.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Validation(format!(
                        "node {} has a non-finite coordinate",
                        n.id
                    )));
                }
            }
            Some(dim)
        };

        let index: HashMap<i64, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut resolved = Vec::with_capacity(edges.len());
        for (k, &(a, b, w)) in edges.iter().enumerate() {
            let ia = *index.get(&a).ok_or_else(|| {
                Error::Validation(format!("edge #{k} ({a}-{b}): endpoint {a} does not exist"))
            })?;
            let ib = *index.get(&b).ok_or_else(|| {
                Error::Validation(format!("edge #{k} ({a}-{b}): endpoint {b} does not exist"))
            })?;
            if ia == ib {
                return Err(Error::Validation(format!(
                    "edge #{k} ({a}-{b}) is a self-loop"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Validation(format!(
                    "edge #{k} ({a}-{b}) has non-positive or non-finite weight {w}"
                )));
            }
            resolved.push((ia.min(ib), ia.max(ib), w));
        }
        resolved.sort_by_key(|x| (x.0, x.1));
        for pair in resolved.windows(2) {
            if (pair[0].0, pair[0].1) == (pair[1].0, pair[1].1) {
                return Err(Error::Validation(format!(
                    "duplicate edge {}-{}",
                    nodes[pair[0].0].id, nodes[pair[0].1].id
                )));
            }
        }

        let edges: Vec<EdgeRecord> = resolved
            .into_iter()
            .map(|(s, t, w)| EdgeRecord {
                source: s,
                target: t,
                weight: w,
                euclidean_length: if dimension.is_some() {
                    distance(&nodes[s].position, &nodes[t].position)
                } else {
                    0.0
                },
            })
            .collect();
        Ok(Self::assemble(nodes, edges, dimension))
    }

    fn assemble(nodes: Vec<NodeRecord>, edges: Vec<EdgeRecord>, dimension: Option<usize>) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut edge_lookup = HashMap::with_capacity(edges.len());
        for (e, edge) in edges.iter().enumerate() {
            adjacency[edge.source].push((edge.target, e));
            adjacency[edge.target].push((edge.source, e));
            edge_lookup.insert((edge.source, edge.target), e);
        }
        Self {
            nodes,
            edges,
            dimension,
            adjacency,
            edge_lookup,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn node(&self, index: usize) -> &NodeRecord {
        &self.nodes[index]
    }

    pub fn edge(&self, id: usize) -> &EdgeRecord {
        &self.edges[id]
    }

    pub fn weight(&self, id: usize) -> f64 {
        self.edges[id].weight
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// Coordinate dimension, `None` for a non-geometric graph.
    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    pub fn is_geometric(&self) -> bool {
        self.dimension.is_some()
    }

    pub fn position(&self, node: usize) -> &[f64] {
        &self.nodes[node].position
    }

    /// `(neighbor, edge id)` pairs incident to `node`, in edge-id order.
    pub fn incident(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn node_index(&self, id: i64) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// Number of connected components (isolated nodes count as components).
    pub fn component_labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        for start in 0..self.nodes.len() {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = next;
            while let Some(n) = stack.pop() {
                for &(m, _) in &self.adjacency[n] {
                    if label[m] == usize::MAX {
                        label[m] = next;
                        stack.push(m);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.component_labels().iter().all(|&c| c == 0)
    }

    /// Copy of the graph with different edge weights (same edge order).
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::Validation(format!(
                "expected {} weights, got {}",
                self.edges.len(),
                weights.len()
            )));
        }
        let mut edges = self.edges.clone();
        for (e, (edge, &w)) in edges.iter_mut().zip(weights).enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Validation(format!("edge {e} would get weight {w}")));
            }
            edge.weight = w;
        }
        Ok(Self::assemble(self.nodes.clone(), edges, self.dimension))
    }

    /// Copy of the graph without the given edges. Returns the new graph and
    /// the map from new edge ids to original edge ids.
    pub fn without_edges(&self, removed: &[usize]) -> (Self, Vec<usize>) {
        let mut keep = vec![true; self.edges.len()];
        for &e in removed {
            keep[e] = false;
        }
        let kept: Vec<usize> = (0..self.edges.len()).filter(|&e| keep[e]).collect();
        let edges = kept.iter().map(|&e| self.edges[e].clone()).collect();
        (
            Self::assemble(self.nodes.clone(), edges, self.dimension),
            kept,
        )
    }

    /// Order-sensitive fingerprint of ids, coordinates, endpoints and weights.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for n in &self.nodes {
            n.id.hash(&mut h);
            for c in &n.position {
                c.to_bits().hash(&mut h);
            }
        }
        for e in &self.edges {
            (e.source, e.target, e.weight.to_bits()).hash(&mut h);
        }
        h.finish()
    }

    /// Structural equality on ids, endpoints, coordinates and weights within
    /// a tolerance scaled by `max(1, |value|)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
        self.dimension == other.dimension
            && self.nodes.len() == other.nodes.len()
            && self.edges.len() == other.edges.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| {
                a.id == b.id
                    && a.position.len() == b.position.len()
                    && a.position
                        .iter()
                        .zip(&b.position)
                        .all(|(x, y)| close(*x, *y))
            })
            && self.edges.iter().zip(&other.edges).all(|(a, b)| {
                a.source == b.source && a.target == b.target && close(a.weight, b.weight)
            })
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Assignment of every edge to one or more filament labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePartition {
    labels: Vec<Vec<u32>>,
}

impl EdgePartition {
    /// Builds a partition from per-edge label lists; lists are sorted and
    /// deduplicated and must be nonempty.
    pub fn new(mut labels: Vec<Vec<u32>>) -> Result<Self> {
        for (e, l) in labels.iter_mut().enumerate() {
            if l.is_empty() {
                return Err(Error::Validation(format!(
                    "edge {e} carries no filament label"
                )));
            }
            l.sort_unstable();
            l.dedup();
        }
        Ok(Self { labels })
    }

    /// Disjoint partition from one label per edge.
    pub fn from_assignment(assignment: &[u32]) -> Self {
        Self {
            labels: assignment.iter().map(|&l| vec![l]).collect(),
        }
    }

    /// Partition induced by a list of filaments given as edge-id lists.
    /// Filament `i` gets label `i`.
    pub fn from_filaments(edge_count: usize, filaments: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![Vec::new(); edge_count];
        for (i, f) in filaments.iter().enumerate() {
            for &e in f {
                if e >= edge_count {
                    return Err(Error::Validation(format!(
                        "filament {i} references edge {e}"
                    )));
                }
                labels[e].push(i as u32);
            }
        }
        Self::new(labels)
    }

    pub fn edge_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self, edge: usize) -> &[u32] {
        &self.labels[edge]
    }

    pub fn all_labels(&self) -> &[Vec<u32>] {
        &self.labels
    }

    /// True iff some edge carries two or more labels.
    pub fn is_overlapping(&self) -> bool {
        self.labels.iter().any(|l| l.len() > 1)
    }

    /// Label → sorted edge ids.
    pub fn filaments(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (e, ls) in self.labels.iter().enumerate() {
            for &l in ls {
                out.entry(l).or_default().push(e);
            }
        }
        out
    }

    pub fn max_label(&self) -> Option<u32> {
        self.labels.iter().flatten().copied().max()
    }

    /// Total number of (edge, label) incidences.
    pub fn incidence_count(&self) -> usize {
        self.labels.iter().map(Vec::len).sum()
    }

    /// True iff the label sets of two edges intersect.
    pub fn same_filament(&self, a: usize, b: usize) -> bool {
        let (x, y) = (&self.labels[a], &self.labels[b]);
        let (mut i, mut j) = (0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Applies a label renaming.
    pub fn relabeled(&self, f: impl Fn(u32) -> u32) -> Self {
        let labels = self
            .labels
            .iter()
            .map(|ls| ls.iter().map(|&l| f(l)).collect())
            .collect();
        Self::new(labels).expect("relabeling keeps label lists nonempty")
    }
}

/// Node-weighted line graph: one node per input edge, adjacent iff the two
/// input edges share an endpoint.
#[derive(Debug, Clone)]
pub struct LineGraph {
    pub node_weights: Vec<f64>,
    /// Edge midpoints; empty vectors for non-geometric input.
    pub positions: Vec<Vec<f64>>,
    /// Sorted `(a, b)` pairs with `a < b`.
    pub edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl LineGraph {
    pub fn node_count(&self) -> usize {
        self.node_weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    /// Hop distances from `source` to every node within `max_d` hops
    /// (`None` = unbounded). Unreached nodes get `None`.
    pub fn distances_from(&self, source: usize, max_d: Option<u32>) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(n) = queue.pop_front() {
            let d = dist[n].unwrap();
            if max_d.is_some_and(|m| d >= m) {
                continue;
            }
            for &m in &self.adjacency[n] {
                if dist[m].is_none() {
                    dist[m] = Some(d + 1);
                    queue.push_back(m);
                }
            }
        }
        dist
    }
}

pub fn line_graph(graph: &WeightedGeometricGraph) -> LineGraph {
    let mut edges = Vec::new();
    for node in 0..graph.node_count() {
        let inc = graph.incident(node);
        for i in 0..inc.len() {
            for j in i + 1..inc.len() {
                let (a, b) = (inc[i].1, inc[j].1);
                edges.push((a.min(b), a.max(b)));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut adjacency = vec![Vec::new(); graph.edge_count()];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    let positions = graph
        .edges()
        .iter()
        .map(|e| {
            if graph.is_geometric() {
                graph
                    .position(e.source)
                    .iter()
                    .zip(graph.position(e.target))
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    LineGraph {
        node_weights: graph.weights(),
        positions,
        edges,
        adjacency,
    }
}

/// Line-graph hop distances between distinct edges, keyed by `(a, b)` with
/// `a < b`. Pairs farther apart than `max_d` (or disconnected) are absent.
#[derive(Debug, Clone, Default)]
pub struct EdgeDistances {
    map: BTreeMap<(usize, usize), u32>,
}

impl EdgeDistances {
    pub fn get(&self, a: usize, b: usize) -> Option<u32> {
        if a == b {
            return Some(0);
        }
        self.map.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), u32)> + '_ {
        self.map.iter().map(|(&k, &v)| (k, v))
    }
}

/// Pairwise edge distances up to `max_d` hops (`None` = unbounded).
pub fn edge_distance_matrix(
    graph: &WeightedGeometricGraph,
    max_d: Option<u32>,
) -> Result<EdgeDistances> {
    if max_d == Some(0) {
        return Err(Error::Config("max_d must be at least 1".into()));
    }
    let lg = line_graph(graph);
    let mut map = BTreeMap::new();
    for a in 0..lg.node_count() {
        for (b, d) in lg.distances_from(a, max_d).into_iter().enumerate() {
            if let Some(d) = d {
                if b > a {
                    map.insert((a, b), d);
                }
            }
        }
    }
    Ok(EdgeDistances { map })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: i64, x: f64, y: f64) -> NodeRecord {
        NodeRecord {
            id,
            position: vec![x, y],
        }
    }

    fn path_graph(n: usize) -> WeightedGeometricGraph {
        let nodes = (0..=n).map(|i| node(i as i64, i as f64, 0.0)).collect();
        let edges = (0..n).map(|i| (i as i64, i as i64 + 1, 1.0)).collect();
        WeightedGeometricGraph::new(nodes, edges).unwrap()
    }

    #[test]
    fn unit_segment() {
        let g = WeightedGeometricGraph::new(
            vec![node(0, 0.0, 0.0), node(1, 1.0, 0.0)],
            vec![(0, 1, 1.0)],
        )
        .unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge(0).euclidean_length, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        let nodes = || vec![node(0, 0.0, 0.0), node(1, 1.0, 0.0)];
        assert!(matches!(
            WeightedGeometricGraph::new(nodes(), vec![(0, 1, -0.5)]),
            Err(Error::Validation(_))
        ));
        assert!(WeightedGeometricGraph::new(nodes(), vec![(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(WeightedGeometricGraph::new(nodes(), vec![(0, 0, 1.0)]).is_err());
        assert!(WeightedGeometricGraph::new(nodes(), vec![(0, 7, 1.0)]).is_err());
        let mixed = vec![
            node(0, 0.0, 0.0),
            NodeRecord {
                id: 1,
                position: vec![],
            },
        ];
        assert!(matches!(
            WeightedGeometricGraph::new(mixed, vec![(0, 1, 1.0)]),
            Err(Error::MissingCoordinates(_))
        ));
    }

    #[test]
    fn edge_ids_follow_sorted_endpoints() {
        let nodes = vec![node(5, 0.0, 0.0), node(2, 1.0, 0.0), node(9, 2.0, 0.0)];
        let g = WeightedGeometricGraph::new(nodes, vec![(9, 5, 3.0), (5, 2, 1.0)]).unwrap();
        assert_eq!(g.node(0).id, 2);
        assert_eq!(g.edge(0).weight, 1.0);
        assert_eq!(g.edge(1).weight, 3.0);
    }

    #[test]
    fn line_graph_of_path_and_star() {
        let lg = line_graph(&path_graph(2));
        assert_eq!((lg.node_count(), lg.edge_count()), (2, 1));

        let nodes = vec![
            node(0, 0.0, 0.0),
            node(1, 1.0, 0.0),
            node(2, 0.0, 1.0),
            node(3, -1.0, 0.0),
        ];
        let star = WeightedGeometricGraph::new(nodes, vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])
            .unwrap();
        let lg = line_graph(&star);
        assert_eq!((lg.node_count(), lg.edge_count()), (3, 3));
        assert_eq!(lg.positions[0], vec![0.5, 0.0]);
    }

    #[test]
    fn distances_on_path() {
        let g = path_graph(3);
        let d = edge_distance_matrix(&g, Some(5)).unwrap();
        assert_eq!(d.get(0, 1), Some(1));
        assert_eq!(d.get(0, 2), Some(2));
        assert_eq!(d.get(2, 0), Some(2));
        let d1 = edge_distance_matrix(&g, Some(1)).unwrap();
        assert_eq!(d1.get(0, 2), None);
        assert!(edge_distance_matrix(&g, Some(0)).is_err());
    }

    #[test]
    fn partition_overlap_flag_and_intersection() {
        let p = EdgePartition::new(vec![vec![0], vec![0, 1], vec![1]]).unwrap();
        assert!(p.is_overlapping());
        assert!(p.same_filament(0, 1));
        assert!(p.same_filament(1, 2));
        assert!(!p.same_filament(0, 2));
        assert!(!EdgePartition::from_assignment(&[0, 0, 1]).is_overlapping());
        assert!(EdgePartition::new(vec![vec![]]).is_err());
    }

    #[test]
    fn removing_edges_keeps_nodes() {
        let g = path_graph(3);
        let (h, map) = g.without_edges(&[1]);
        assert_eq!(h.node_count(), 4);
        assert_eq!(map, vec![0, 2]);
        assert!(!h.is_connected());
    }
}
