//! Ground-truth fixtures and random instances.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgePartition, NodeRecord, WeightedGeometricGraph};

/// A network with its known filament decomposition.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub graph: WeightedGeometricGraph,
    pub truth: EdgePartition,
    pub description: String,
}

/// Incremental construction of a network from filament polylines.
#[derive(Default)]
struct Builder {
    nodes: Vec<(f64, f64)>,
    edges: BTreeMap<(usize, usize), (f64, Vec<u32>)>,
}

impl Builder {
    fn node(&mut self, x: f64, y: f64) -> usize {
        if let Some(i) = self
            .nodes
            .iter()
            .position(|&(a, b)| (a - x).abs() < 1e-9 && (b - y).abs() < 1e-9)
        {
            return i;
        }
        self.nodes.push((x, y));
        self.nodes.len() - 1
    }

    /// Adds the polyline through `nodes` as filament `label`. Edges that
    /// already exist gain the label and keep their weight.
    fn filament(&mut self, label: u32, nodes: &[usize], weight: impl Fn(usize) -> f64) {
        for (i, w) in nodes.windows(2).enumerate() {
            let key = (w[0].min(w[1]), w[0].max(w[1]));
            let entry = self
                .edges
                .entry(key)
                .or_insert_with(|| (weight(i), Vec::new()));
            entry.1.push(label);
        }
    }

    fn set_weight(&mut self, a: usize, b: usize, w: f64) {
        self.edges
            .get_mut(&(a.min(b), a.max(b)))
            .expect("edge exists")
            .0 = w;
    }

    fn finish(self) -> (WeightedGeometricGraph, EdgePartition) {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| NodeRecord {
                id: i as i64,
                position: vec![x, y],
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|(&(a, b), &(w, _))| (a as i64, b as i64, w))
            .collect();
        let graph = WeightedGeometricGraph::new(nodes, edges).expect("fixture is valid");
        // Graph edges are sorted by endpoint pair, matching the map order.
        let labels = self.edges.into_values().map(|(_, l)| l).collect();
        let truth = EdgePartition::new(labels).expect("every fixture edge is labeled");
        (graph, truth)
    }
}

/// Weight of the `i`-th edge of a filament with nominal weight `w`: a small
/// alternating ripple makes each extra fragment cost roughness.
fn ripple(w: f64) -> impl Fn(usize) -> f64 {
    move |i| if i % 2 == 0 { w - 0.02 } else { w + 0.02 }
}

/// Synthetic network with a crossing, a two-filament overlap and a loop.
///
/// * filament 0: horizontal line of 12 edges, weight ≈ 1.0
/// * filament 1: joins filament 0 from above at 30°, shares 3 of its edges
///   and leaves below at 30°, weight ≈ 1.4; shared edges weigh 1.2
/// * filament 2: vertical line of 4 edges crossing filament 0 at a
///   degree-4 node, weight ≈ 1.8
/// * filament 3: regular heptagon hanging off the top of filament 2,
///   weight ≈ 2.4
pub fn fixture_contrived() -> Fixture {
    let mut b = Builder::default();
    let a: Vec<usize> = (0..=12).map(|i| b.node(i as f64, 0.0)).collect();
    let (c, s) = ((PI / 6.0).cos(), (PI / 6.0).sin());
    let mut arm_in: Vec<usize> = (1..=3)
        .rev()
        .map(|k| b.node(5.0 - k as f64 * c, k as f64 * s))
        .collect();
    let arm_out: Vec<usize> = (1..=3)
        .map(|k| b.node(8.0 + k as f64 * c, -(k as f64) * s))
        .collect();
    let vertical: Vec<usize> = (-2..=2).map(|k| b.node(2.0, k as f64)).collect();

    b.filament(0, &a, ripple(1.0));
    let mut second = std::mem::take(&mut arm_in);
    second.extend_from_slice(&a[5..=8]);
    second.extend_from_slice(&arm_out);
    b.filament(1, &second, ripple(1.4));
    for i in 5..8 {
        b.set_weight(a[i], a[i + 1], 1.2);
    }
    b.filament(2, &vertical, ripple(1.8));

    // Heptagon whose lowest vertex is the top of the vertical line.
    let top = vertical[4];
    let radius = 0.5 / (PI / 7.0).sin();
    let centre = (2.0, 2.0 + radius);
    let mut ring: Vec<usize> = (0..7)
        .map(|k| {
            let t = -PI / 2.0 + 2.0 * PI * k as f64 / 7.0;
            if k == 0 {
                top
            } else {
                b.node(centre.0 + radius * t.cos(), centre.1 + radius * t.sin())
            }
        })
        .collect();
    ring.push(top);
    b.filament(3, &ring, ripple(2.4));

    let (graph, truth) = b.finish();
    Fixture {
        graph,
        truth,
        description: "contrived network: horizontal line, overlapping oblique filament, vertical crossing line, heptagon loop"
            .into(),
    }
}

/// Random tree on `n` uniform points in the unit square: a minimum spanning
/// tree of the relative neighbourhood graph under uniform random edge
/// weights. Edge weights are uniform in (0, 1].
pub fn random_geometric_tree(n: usize, seed: u64) -> Result<WeightedGeometricGraph> {
    if n < 2 {
        return Err(Error::Config("a random tree needs at least 2 nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let d = |i: usize, j: usize| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
    let mut rng_edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dij = d(i, j);
            if !(0..n).any(|k| k != i && k != j && d(i, k).max(d(j, k)) < dij) {
                rng_edges.push((i, j));
            }
        }
    }
    let keys: Vec<f64> = rng_edges.iter().map(|_| rng.random::<f64>()).collect();
    let mut order: Vec<usize> = (0..rng_edges.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    let mut uf = UnionFind::<usize>::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    for k in order {
        let (i, j) = rng_edges[k];
        if uf.union(i, j) {
            edges.push((i as i64, j as i64, 1.0 - rng.random::<f64>()));
        }
    }
    let nodes = pts
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| NodeRecord {
            id: i as i64,
            position: vec![x, y],
        })
        .collect();
    WeightedGeometricGraph::new(nodes, edges)
}

/// Random overlapping decomposition of a tree into paths. Paths through a
/// random uncovered edge are drawn and kept while the total overlap
/// `Σ_e (count_e − 1)` stays below `max_overlap_edges`; a path that would
/// exceed it is retried and finally replaced by the bare edge.
pub fn random_overlapping_tree_cover(
    tree: &WeightedGeometricGraph,
    max_overlap_edges: usize,
    seed: u64,
) -> Result<EdgePartition> {
    let n = tree.node_count();
    if tree.edge_count() + 1 != n || !tree.is_connected() {
        return Err(Error::NotATree(
            "random_overlapping_tree_cover needs a tree".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Vec<u32>> = vec![Vec::new(); tree.edge_count()];
    let mut overlap = 0usize;
    let mut next = 0u32;
    loop {
        let uncovered: Vec<usize> = (0..tree.edge_count())
            .filter(|&e| labels[e].is_empty())
            .collect();
        if uncovered.is_empty() {
            break;
        }
        let e = uncovered[rng.random_range(0..uncovered.len())];
        let (u, v) = tree.edge(e).endpoints();
        let mut accepted = None;
        for _ in 0..10 {
            let a = random_walk_end(tree, u, e, &mut rng);
            let b = random_walk_end(tree, v, e, &mut rng);
            let mut path = tree_path(tree, a, u);
            path.push(e);
            path.extend(tree_path(tree, v, b));
            let extra = path.iter().filter(|&&f| !labels[f].is_empty()).count();
            if overlap + extra < max_overlap_edges {
                overlap += extra;
                accepted = Some(path);
                break;
            }
        }
        for f in accepted.unwrap_or_else(|| vec![e]) {
            labels[f].push(next);
        }
        next += 1;
    }
    EdgePartition::new(labels)
}

/// Endpoint of a random walk from `start` that never re-crosses `avoid`,
/// stopping with probability 1/3 at every step.
fn random_walk_end(
    tree: &WeightedGeometricGraph,
    start: usize,
    avoid: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    let (mut at, mut from) = (start, avoid);
    loop {
        let options: Vec<(usize, usize)> = tree
            .incident(at)
            .iter()
            .copied()
            .filter(|&(_, f)| f != from)
            .collect();
        if options.is_empty() || rng.random::<f64>() < 1.0 / 3.0 {
            return at;
        }
        let (m, f) = options[rng.random_range(0..options.len())];
        at = m;
        from = f;
    }
}

/// Edge ids of the tree path from `a` to `b`.
fn tree_path(tree: &WeightedGeometricGraph, a: usize, b: usize) -> Vec<usize> {
    let n = tree.node_count();
    let mut prev = vec![None; n];
    let mut seen = vec![false; n];
    seen[a] = true;
    let mut queue = std::collections::VecDeque::from([a]);
    while let Some(u) = queue.pop_front() {
        for &(v, e) in tree.incident(u) {
            if !seen[v] {
                seen[v] = true;
                prev[v] = Some((u, e));
                queue.push_back(v);
            }
        }
    }
    let mut edges = Vec::new();
    let mut at = b;
    while let Some((p, e)) = prev[at] {
        edges.push(e);
        at = p;
    }
    edges.reverse();
    edges
}

fn grid_graph(
    points: &[(i64, i64)],
    edges: &[(usize, usize)],
    weights: &[f64],
) -> WeightedGeometricGraph {
    let nodes = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| NodeRecord {
            id: i as i64,
            position: vec![x as f64, y as f64],
        })
        .collect();
    let edges = edges
        .iter()
        .zip(weights)
        .map(|(&(a, b), &w)| (a as i64, b as i64, w))
        .collect();
    WeightedGeometricGraph::new(nodes, edges).expect("corpus graph is valid")
}

/// Grid points and the edges between them.
type Shape = (Vec<(i64, i64)>, Vec<(usize, usize)>);

/// Named topologies on a small grid: points and edges.
fn corpus_shapes() -> Vec<Shape> {
    let mut shapes = Vec::new();
    let chain = |pts: Vec<(i64, i64)>| {
        let e = (1..pts.len()).map(|i| (i - 1, i)).collect();
        (pts, e)
    };
    let ring = |pts: Vec<(i64, i64)>| {
        let n = pts.len();
        let e = (0..n)
            .map(|i| (i.min((i + 1) % n), i.max((i + 1) % n)))
            .collect();
        (pts, e)
    };
    // Straight and bent paths.
    for k in 1..=7 {
        shapes.push(chain((0..=k).map(|i| (i, 0)).collect()));
    }
    for k in 2..=7 {
        shapes.push(chain((0..=k).map(|i| (i, i % 2)).collect()));
    }
    shapes.push(chain(vec![(0, 0), (1, 0), (1, 1)]));
    shapes.push(chain(vec![(0, 0), (1, 0), (2, 1), (3, 1)]));
    shapes.push(chain(vec![(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)]));
    // Stars.
    shapes.push((
        vec![(1, 1), (0, 1), (2, 1), (1, 0)],
        vec![(0, 1), (0, 2), (0, 3)],
    ));
    shapes.push((
        vec![(1, 1), (0, 1), (2, 1), (1, 0), (1, 2)],
        vec![(0, 1), (0, 2), (0, 3), (0, 4)],
    ));
    shapes.push((
        vec![(1, 1), (0, 1), (2, 1), (1, 0), (1, 2), (0, 0)],
        vec![(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)],
    ));
    // Spiders: stars with one or two long legs.
    shapes.push((
        vec![(1, 1), (0, 1), (2, 1), (1, 0), (3, 1)],
        vec![(0, 1), (0, 2), (0, 3), (2, 4)],
    ));
    shapes.push((
        vec![(1, 1), (0, 1), (2, 1), (1, 0), (3, 1), (1, 2), (1, 3)],
        vec![(0, 1), (0, 2), (0, 3), (2, 4), (0, 5), (5, 6)],
    ));
    // Cycles.
    shapes.push(ring(vec![(0, 0), (1, 0), (0, 1)]));
    shapes.push(ring(vec![(0, 0), (1, 0), (1, 1), (0, 1)]));
    shapes.push(ring(vec![(0, 0), (1, 0), (2, 1), (1, 2), (0, 1)]));
    shapes.push(ring(vec![(0, 0), (1, 0), (2, 0), (2, 1), (1, 1), (0, 1)]));
    shapes.push(ring(vec![
        (0, 0),
        (1, 0),
        (2, 0),
        (3, 1),
        (2, 2),
        (1, 2),
        (0, 1),
    ]));
    // Thetas: two nodes joined by three internally disjoint paths.
    shapes.push((
        vec![(0, 0), (1, 0), (1, 1), (0, 1)],
        vec![(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)],
    ));
    shapes.push((
        vec![(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)],
        vec![(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)],
    ));
    shapes.push((
        vec![(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)],
        vec![(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (2, 5), (1, 3)],
    ));
    // Cycles with tails and a crossing.
    shapes.push((
        vec![(0, 0), (1, 0), (1, 1), (0, 1), (2, 0)],
        vec![(0, 1), (1, 2), (2, 3), (0, 3), (1, 4)],
    ));
    shapes.push((
        vec![(0, 0), (1, 0), (1, 1), (0, 1), (2, 0), (3, 0), (-1, 1)],
        vec![(0, 1), (1, 2), (2, 3), (0, 3), (1, 4), (4, 5), (3, 6)],
    ));
    shapes.push((
        vec![(1, 1), (0, 1), (2, 1), (1, 0), (1, 2), (3, 1), (1, 3)],
        vec![(0, 1), (0, 2), (0, 3), (0, 4), (2, 5), (4, 6)],
    ));
    shapes
}

/// King-move neighbours on the 3 × 3 grid.
fn king_edges() -> Shape {
    let pts: Vec<(i64, i64)> = (0..9).map(|i| (i % 3, i / 3)).collect();
    let mut edges = Vec::new();
    for i in 0..9 {
        for j in i + 1..9 {
            let (dx, dy) = ((pts[i].0 - pts[j].0).abs(), (pts[i].1 - pts[j].1).abs());
            if dx.max(dy) == 1 {
                edges.push((i, j));
            }
        }
    }
    (pts, edges)
}

/// Random connected subgraph of the king grid with `m` edges grown from a
/// random edge.
fn random_king_subgraph(m: usize, rng: &mut ChaCha8Rng) -> Shape {
    let (pts, all) = king_edges();
    let mut chosen = vec![all[rng.random_range(0..all.len())]];
    while chosen.len() < m {
        let touched: Vec<usize> = chosen.iter().flat_map(|&(a, b)| [a, b]).collect();
        let frontier: Vec<(usize, usize)> = all
            .iter()
            .copied()
            .filter(|e| !chosen.contains(e) && (touched.contains(&e.0) || touched.contains(&e.1)))
            .collect();
        chosen.push(frontier[rng.random_range(0..frontier.len())]);
    }
    chosen.sort_unstable();
    let mut used: Vec<usize> = chosen.iter().flat_map(|&(a, b)| [a, b]).collect();
    used.sort_unstable();
    used.dedup();
    let remap = |x: usize| used.binary_search(&x).expect("used node");
    let edges = chosen.iter().map(|&(a, b)| (remap(a), remap(b))).collect();
    (used.iter().map(|&i| pts[i]).collect(), edges)
}

/// Number of graphs in the small-instance corpus.
pub const SMALL_CORPUS_SIZE: usize = 240;

/// Deterministic corpus of small connected geometric graphs with at most
/// `max_edges` edges and weights in {1, 2, 3}: paths, stars, cycles, theta
/// graphs and random subgraphs of the 3 × 3 king grid.
pub fn enumerate_small_instances(max_edges: usize) -> Vec<WeightedGeometricGraph> {
    let max_edges = max_edges.clamp(1, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    let weights = |m: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..m).map(|_| rng.random_range(1..=3) as f64).collect()
    };
    let shapes: Vec<_> = corpus_shapes()
        .into_iter()
        .filter(|(_, e)| e.len() <= max_edges)
        .collect();
    // Each named shape with unit weights and with two random weightings.
    for (pts, edges) in &shapes {
        out.push(grid_graph(pts, edges, &vec![1.0; edges.len()]));
        for _ in 0..2 {
            let w = weights(edges.len(), &mut rng);
            out.push(grid_graph(pts, edges, &w));
        }
    }
    while out.len() < SMALL_CORPUS_SIZE {
        let m = rng.random_range(max_edges.min(3)..=max_edges);
        let (pts, edges) = random_king_subgraph(m, &mut rng);
        let w = weights(edges.len(), &mut rng);
        out.push(grid_graph(&pts, &edges, &w));
    }
    out
}

/// Jittered square lattice with `side × side` nodes and up to `2·side`
/// random diagonal edges. Each lattice row and column is a filament with
/// its own nominal weight plus small noise. `side = 10` gives about 200
/// edges.
pub fn random_filament_network(side: usize, seed: u64) -> Result<WeightedGeometricGraph> {
    if side < 2 {
        return Err(Error::Config("lattice side must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = |i: usize, j: usize| i * side + j;
    let mut nodes = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            nodes.push(NodeRecord {
                id: idx(i, j) as i64,
                position: vec![
                    j as f64 + 0.3 * (rng.random::<f64>() - 0.5),
                    i as f64 + 0.3 * (rng.random::<f64>() - 0.5),
                ],
            });
        }
    }
    let row_w: Vec<f64> = (0..side).map(|_| 0.5 + rng.random::<f64>()).collect();
    let col_w: Vec<f64> = (0..side).map(|_| 0.5 + rng.random::<f64>()).collect();
    let mut edges = Vec::new();
    let jitter = |w: f64, rng: &mut ChaCha8Rng| w + 0.05 * (rng.random::<f64>() - 0.5);
    for (i, &rw) in row_w.iter().enumerate() {
        for (j, &cw) in col_w.iter().enumerate() {
            if j + 1 < side {
                edges.push((idx(i, j) as i64, idx(i, j + 1) as i64, jitter(rw, &mut rng)));
            }
            if i + 1 < side {
                edges.push((idx(i, j) as i64, idx(i + 1, j) as i64, jitter(cw, &mut rng)));
            }
        }
    }
    for _ in 0..2 * side {
        let (i, j) = (rng.random_range(0..side - 1), rng.random_range(0..side - 1));
        let e = if rng.random::<bool>() {
            (idx(i, j) as i64, idx(i + 1, j + 1) as i64)
        } else {
            (idx(i, j + 1) as i64, idx(i + 1, j) as i64)
        };
        if !edges.iter().any(|&(a, b, _)| (a, b) == e) {
            let w = 0.5 + rng.random::<f64>();
            edges.push((e.0, e.1, w));
        }
    }
    WeightedGeometricGraph::new(nodes, edges)
}
