//! Exact filament covers of trees by dynamic programming.
//!
//! For disjoint covers (`k = 1`) every path has a unique top node closest
//! to the root. At a node `u` each child edge starts a downward path with
//! top `u`, either alone or paired with a second child edge. Once a path
//! `u → x` is fixed, the rest of the child subtree decomposes into
//! independent subproblems along the chain to `x`, so subtree optima
//! combine through a small bitmask program over the children of `u`.
//! The cost is polynomial: every node pair is examined once at its top
//! node and each path is evaluated in linear time.
//!
//! For `k ∈ {2, 3}` the program is keyed by the set of paths crossing the
//! edge into a node and enumerates the paths topped at that node. That
//! search is exponential and meant for small trees.
//!
//! The average objective wraps either program in the parametric
//! iteration used by the cover solver.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGeometricGraph;
use crate::roughness::{FilamentPath, RoughnessKind};
use crate::solver::{dinkelbach, CoverMode, FilamentCover, Objective, SolverStats};

/// Largest number of children handled by the per-node bitmask program.
pub const MAX_CHILDREN: usize = 20;
/// Budget of partial selections explored by the bounded-overlap search.
pub const OVERLAP_SEARCH_LIMIT: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeCoverConfig {
    pub k_overlap: usize,
    pub objective: Objective,
    pub roughness_kind: RoughnessKind,
}

impl Default for TreeCoverConfig {
    fn default() -> Self {
        Self {
            k_overlap: 1,
            objective: Objective::Total,
            roughness_kind: RoughnessKind::Pair,
        }
    }
}

/// Rooted view of a tree.
struct Rooted<'g> {
    graph: &'g WeightedGeometricGraph,
    parent: Vec<Option<(usize, usize)>>,
    children: Vec<Vec<usize>>,
    /// Nodes in breadth-first order from the root.
    order: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
}

impl<'g> Rooted<'g> {
    fn new(graph: &'g WeightedGeometricGraph) -> Result<Self> {
        let n = graph.node_count();
        if graph.edge_count() == 0 {
            return Err(Error::Validation("graph has no edges".into()));
        }
        if graph.edge_count() + 1 != n || !graph.is_connected() {
            return Err(Error::NotATree(format!(
                "{} nodes and {} edges in {} component(s)",
                n,
                graph.edge_count(),
                graph.component_labels().iter().max().map_or(0, |m| m + 1)
            )));
        }
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut order = vec![0];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            for &(v, e) in graph.incident(u) {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, e));
                    children[u].push(v);
                    order.push(v);
                }
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        let (mut tin, mut tout) = (vec![0; n], vec![0; n]);
        let mut clock = 0;
        let mut stack = vec![(0usize, false)];
        while let Some((u, done)) = stack.pop() {
            if done {
                tout[u] = clock;
                continue;
            }
            tin[u] = clock;
            clock += 1;
            stack.push((u, true));
            for &c in children[u].iter().rev() {
                stack.push((c, false));
            }
        }
        Ok(Self {
            graph,
            parent,
            children,
            order,
            tin,
            tout,
        })
    }

    /// True iff `x` lies in the subtree of `a` (inclusive).
    fn within(&self, x: usize, a: usize) -> bool {
        self.tin[a] <= self.tin[x] && self.tin[x] < self.tout[a]
    }

    /// Nodes of the subtree of `c`, preorder.
    fn subtree(&self, c: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![c];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &v in self.children[u].iter().rev() {
                stack.push(v);
            }
        }
        out
    }

    /// Edges from `x` up to its ancestor `top`, bottom first.
    fn up_edges(&self, x: usize, top: usize) -> Vec<usize> {
        let mut edges = Vec::new();
        let mut at = x;
        while at != top {
            let (p, e) = self.parent[at].expect("ancestor reachable");
            edges.push(e);
            at = p;
        }
        edges
    }

    /// Edge sequence of the path `x → top → y` where `top` is an ancestor
    /// of both (`y` may equal `top`).
    fn path_edges(&self, x: usize, top: usize, y: usize) -> Vec<usize> {
        let mut edges = self.up_edges(x, top);
        let mut down = self.up_edges(y, top);
        down.reverse();
        edges.extend(down);
        edges
    }

    /// Lowest common ancestor by walking parents.
    fn lca(&self, a: usize, b: usize) -> usize {
        let mut x = a;
        while !self.within(b, x) {
            x = self.parent[x].expect("root contains all").0;
        }
        x
    }
}

struct Costing<'a> {
    kind: RoughnessKind,
    lambda: f64,
    graph: &'a WeightedGeometricGraph,
}

impl Costing<'_> {
    fn of(&self, edges: &[usize]) -> f64 {
        let w: Vec<f64> = edges.iter().map(|&e| self.graph.weight(e)).collect();
        self.kind.of_weights(&w) - self.lambda
    }
}

/// Disjoint tree cover: a selection of paths as `(x, top, y)` triples.
type Triples = Vec<(usize, usize, usize)>;

#[derive(Clone, Copy)]
enum Pick {
    Single(usize),
    Pair(usize, usize),
}

struct NodeTable {
    /// Child node → bit position.
    bit: HashMap<usize, usize>,
    dp: Vec<f64>,
    pick: Vec<Option<(Pick, usize)>>,
    /// Best single path endpoint per child, and its value.
    single: Vec<(usize, f64)>,
    /// Best pair endpoints per child pair `(i, j)`, `i < j`.
    pair: HashMap<(usize, usize), (usize, usize, f64)>,
}

fn disjoint_program(t: &Rooted, cost: &Costing) -> Result<(f64, Triples)> {
    let n = t.graph.node_count();
    let mut full = vec![0.0f64; n];
    let mut tables: Vec<Option<NodeTable>> = (0..n).map(|_| None).collect();

    for &u in t.order.iter().rev() {
        let kids = &t.children[u];
        if kids.is_empty() {
            continue;
        }
        if kids.len() > MAX_CHILDREN {
            return Err(Error::Config(format!(
                "node {} has {} children; the tree program supports at most {MAX_CHILDREN}",
                t.graph.node(u).id,
                kids.len()
            )));
        }
        // Residual R(c → x): optimal cost of the subtree of c when the
        // chain c..x belongs to a path entering from above.
        let mut residual: Vec<Vec<(usize, f64)>> = Vec::with_capacity(kids.len());
        for &c in kids {
            let mut out = Vec::new();
            let mut stack = vec![(c, 0.0f64)];
            while let Some((w, acc)) = stack.pop() {
                out.push((w, acc + full[w]));
                if let Some(tab) = &tables[w] {
                    let all = tab.dp.len() - 1;
                    for &y in &t.children[w] {
                        let excl = tab.dp[all ^ (1 << tab.bit[&y])];
                        stack.push((y, acc + excl));
                    }
                }
            }
            out.sort_unstable_by_key(|&(x, _)| x);
            residual.push(out);
        }
        let ups: Vec<Vec<(usize, Vec<usize>, f64)>> = residual
            .iter()
            .map(|r| r.iter().map(|&(x, rv)| (x, t.up_edges(x, u), rv)).collect())
            .collect();
        let mut single = Vec::with_capacity(kids.len());
        for branch in &ups {
            let mut best = (usize::MAX, f64::INFINITY);
            for (x, edges, rv) in branch {
                let v = cost.of(edges) + rv;
                if v < best.1 {
                    best = (*x, v);
                }
            }
            single.push(best);
        }
        let mut pair = HashMap::new();
        for i in 0..kids.len() {
            for j in i + 1..kids.len() {
                let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
                for (x, ex, rx) in &ups[i] {
                    for (y, ey, ry) in &ups[j] {
                        let mut edges = ex.clone();
                        edges.extend(ey.iter().rev());
                        let v = cost.of(&edges) + rx + ry;
                        if v < best.2 {
                            best = (*x, *y, v);
                        }
                    }
                }
                pair.insert((i, j), best);
            }
        }
        let m = kids.len();
        let mut dp = vec![f64::INFINITY; 1 << m];
        let mut pick = vec![None; 1 << m];
        dp[0] = 0.0;
        for mask in 1usize..(1 << m) {
            let i = mask.trailing_zeros() as usize;
            let rest = mask ^ (1 << i);
            let mut best = single[i].1 + dp[rest];
            let mut choice = (Pick::Single(i), rest);
            let mut others = rest;
            while others != 0 {
                let j = others.trailing_zeros() as usize;
                others ^= 1 << j;
                let v = pair[&(i, j)].2 + dp[rest ^ (1 << j)];
                if v < best {
                    best = v;
                    choice = (Pick::Pair(i, j), rest ^ (1 << j));
                }
            }
            dp[mask] = best;
            pick[mask] = Some(choice);
        }
        full[u] = dp[(1 << m) - 1];
        let bit = kids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        tables[u] = Some(NodeTable {
            bit,
            dp,
            pick,
            single,
            pair,
        });
    }

    // Reconstruction.
    let mut paths = Triples::new();
    // (node, mask of children whose edges are still to be covered by paths
    // topped at this node)
    let mut work: Vec<(usize, usize)> = Vec::new();
    let push_full = |u: usize, work: &mut Vec<(usize, usize)>, tables: &Vec<Option<NodeTable>>| {
        if let Some(tab) = &tables[u] {
            work.push((u, tab.dp.len() - 1));
        }
    };
    push_full(0, &mut work, &tables);
    while let Some((u, mut mask)) = work.pop() {
        let tab = tables[u].as_ref().expect("inner node");
        let kids = &t.children[u];
        while mask != 0 {
            let (p, rest) = tab.pick[mask].expect("filled");
            let ends: Vec<(usize, usize)> = match p {
                Pick::Single(i) => {
                    let x = tab.single[i].0;
                    paths.push((x, u, u));
                    vec![(kids[i], x)]
                }
                Pick::Pair(i, j) => {
                    let (x, y, _) = tab.pair[&(i, j)];
                    paths.push((x, u, y));
                    vec![(kids[i], x), (kids[j], y)]
                }
            };
            for (c, x) in ends {
                // Chain c..x: every node strictly above x keeps its other
                // children; x keeps all of its children.
                let mut chain = vec![x];
                let mut at = x;
                while at != c {
                    at = t.parent[at].expect("below c").0;
                    chain.push(at);
                }
                for w in chain.windows(2) {
                    let (below, above) = (w[0], w[1]);
                    let tab = tables[above].as_ref().expect("has child");
                    let all = tab.dp.len() - 1;
                    let m = all ^ (1 << tab.bit[&below]);
                    if m != 0 {
                        work.push((above, m));
                    }
                }
                push_full(x, &mut work, &tables);
            }
            mask = rest;
        }
    }
    let total: f64 = full[0];
    Ok((total, paths))
}

type PathKey = (usize, usize);

struct OverlapSearch<'a, 'g> {
    t: &'a Rooted<'g>,
    cost: &'a Costing<'a>,
    k: usize,
    memo: HashMap<(usize, Vec<PathKey>), (f64, Vec<PathKey>)>,
    budget: u64,
}

impl OverlapSearch<'_, '_> {
    fn path_cost(&self, (a, b): PathKey) -> f64 {
        let top = self.t.lca(a, b);
        self.cost.of(&self.t.path_edges(a, top, b))
    }

    /// Which child of `w` (by position) the path continues into, if any.
    fn continuation(&self, w: usize, (a, b): PathKey) -> Option<usize> {
        let kids = &self.t.children[w];
        for end in [a, b] {
            if end != w && self.t.within(end, w) {
                return kids.iter().position(|&c| self.t.within(end, c));
            }
        }
        None
    }

    fn solve(&mut self, w: usize, incoming: Vec<PathKey>) -> Result<f64> {
        if self.t.children[w].is_empty() {
            return Ok(0.0);
        }
        if let Some((v, _)) = self.memo.get(&(w, incoming.clone())) {
            return Ok(*v);
        }
        let kids = self.t.children[w].clone();
        let mut base = vec![Vec::new(); kids.len()];
        for &p in &incoming {
            if let Some(i) = self.continuation(w, p) {
                base[i].push(p);
            }
        }
        // Candidate paths topped at w.
        let mut candidates: Vec<(PathKey, Vec<usize>, f64)> = Vec::new();
        let subtrees: Vec<Vec<usize>> = kids.iter().map(|&c| self.t.subtree(c)).collect();
        for (i, si) in subtrees.iter().enumerate() {
            for &x in si {
                let key = (x.min(w), x.max(w));
                candidates.push((key, vec![i], self.path_cost(key)));
            }
            for (j, sj) in subtrees.iter().enumerate().skip(i + 1) {
                for &x in si {
                    for &y in sj {
                        let key = (x.min(y), x.max(y));
                        candidates.push((key, vec![i, j], self.path_cost(key)));
                    }
                }
            }
        }
        candidates.sort_by_key(|c| c.0);
        let mut best = (f64::INFINITY, Vec::new());
        let mut chosen = Vec::new();
        let mut counts: Vec<usize> = base.iter().map(Vec::len).collect();
        self.enumerate(
            &kids,
            &base,
            &candidates,
            0,
            &mut counts,
            &mut chosen,
            0.0,
            &mut best,
        )?;
        if !best.0.is_finite() {
            return Err(Error::Validation("no bounded-overlap cover exists".into()));
        }
        self.memo.insert((w, incoming), best.clone());
        Ok(best.0)
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &mut self,
        kids: &[usize],
        base: &[Vec<PathKey>],
        candidates: &[(PathKey, Vec<usize>, f64)],
        idx: usize,
        counts: &mut Vec<usize>,
        chosen: &mut Vec<usize>,
        acc: f64,
        best: &mut (f64, Vec<PathKey>),
    ) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::NodeLimitExceeded {
                limit: OVERLAP_SEARCH_LIMIT,
                incumbent: best.0.is_finite().then_some(best.0),
                gap: None,
            });
        }
        self.budget -= 1;
        if idx == candidates.len() {
            if counts.contains(&0) {
                return Ok(());
            }
            let mut total = acc;
            for (i, &c) in kids.iter().enumerate() {
                let mut crossing = base[i].clone();
                crossing.extend(
                    chosen
                        .iter()
                        .filter(|&&q| candidates[q].1.contains(&i))
                        .map(|&q| candidates[q].0),
                );
                crossing.sort_unstable();
                total += self.solve(c, crossing)?;
            }
            if total < best.0 {
                *best = (total, chosen.iter().map(|&q| candidates[q].0).collect());
            }
            return Ok(());
        }
        let (_, uses, c) = &candidates[idx];
        if uses.iter().all(|&i| counts[i] < self.k) {
            for &i in uses {
                counts[i] += 1;
            }
            chosen.push(idx);
            self.enumerate(
                kids,
                base,
                candidates,
                idx + 1,
                counts,
                chosen,
                acc + c,
                best,
            )?;
            chosen.pop();
            for &i in uses {
                counts[i] -= 1;
            }
        }
        self.enumerate(kids, base, candidates, idx + 1, counts, chosen, acc, best)
    }

    fn collect(&self, w: usize, incoming: Vec<PathKey>, out: &mut Vec<PathKey>) {
        if self.t.children[w].is_empty() {
            return;
        }
        let (_, q) = &self.memo[&(w, incoming.clone())];
        out.extend(q.iter().copied());
        for &c in &self.t.children[w] {
            let mut crossing: Vec<PathKey> = incoming
                .iter()
                .chain(q.iter())
                .copied()
                .filter(|&(a, b)| self.t.within(a, c) || self.t.within(b, c))
                .collect();
            crossing.sort_unstable();
            self.collect(c, crossing, out);
        }
    }
}

fn overlap_program(t: &Rooted, cost: &Costing, k: usize) -> Result<(f64, Triples)> {
    let mut search = OverlapSearch {
        t,
        cost,
        k,
        memo: HashMap::new(),
        budget: OVERLAP_SEARCH_LIMIT,
    };
    let value = search.solve(0, Vec::new())?;
    let mut keys = Vec::new();
    search.collect(0, Vec::new(), &mut keys);
    keys.sort_unstable();
    let triples = keys
        .into_iter()
        .map(|(a, b)| {
            let top = t.lca(a, b);
            if a == top {
                (b, top, top)
            } else if b == top {
                (a, top, top)
            } else {
                (a, top, b)
            }
        })
        .collect();
    Ok((value, triples))
}

fn run_program(t: &Rooted, kind: RoughnessKind, lambda: f64, k: usize) -> Result<(f64, Triples)> {
    let cost = Costing {
        kind,
        lambda,
        graph: t.graph,
    };
    if k == 1 {
        disjoint_program(t, &cost)
    } else {
        overlap_program(t, &cost, k)
    }
}

fn to_paths(t: &Rooted, triples: &Triples) -> Result<Vec<FilamentPath>> {
    triples
        .iter()
        .map(|&(x, top, y)| {
            FilamentPath::from_edges(t.graph, t.path_edges(x, top, y)).map(FilamentPath::canonical)
        })
        .collect()
}

/// Optimal cover of a tree in which every edge lies on between 1 and
/// `k_overlap` paths (exactly one for `k_overlap = 1`).
pub fn solve_tree(
    graph: &WeightedGeometricGraph,
    config: &TreeCoverConfig,
) -> Result<FilamentCover> {
    if config.k_overlap == 0 || config.k_overlap > 3 {
        return Err(Error::KTooLarge(config.k_overlap));
    }
    let start = Instant::now();
    let t = Rooted::new(graph)?;
    let k = config.k_overlap;
    let (triples, subproblems) = match config.objective {
        Objective::Total => (run_program(&t, config.roughness_kind, 0.0, k)?.1, 1),
        Objective::Avg => {
            // Every tree path is identified by its endpoint pair.
            let n = graph.node_count();
            let id = |a: usize, b: usize| a.min(b) * n + a.max(b);
            let mut costs = vec![0.0; n * n];
            for a in 0..n {
                for b in a + 1..n {
                    let top = t.lca(a, b);
                    let w: Vec<f64> = t
                        .path_edges(a, top, b)
                        .iter()
                        .map(|&e| graph.weight(e))
                        .collect();
                    costs[id(a, b)] = config.roughness_kind.of_weights(&w);
                }
            }
            let frac = dinkelbach(&costs, None, 1e-9, |lambda| {
                let (_, tr) = run_program(&t, config.roughness_kind, lambda, k)?;
                Ok((tr.iter().map(|&(x, _, y)| id(x, y)).collect(), 0))
            })?;
            let triples = frac
                .chosen
                .iter()
                .map(|&i| {
                    let (a, b) = (i / n, i % n);
                    let top = t.lca(a, b);
                    (a, top, b)
                })
                .collect();
            (triples, frac.iterations)
        }
    };
    let paths = to_paths(&t, &triples)?;
    let stats = SolverStats {
        nodes_explored: 0,
        pool_size: 0,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: 0,
        method: "tree".into(),
        rng: "none".into(),
        subproblems,
    };
    let mode = if k == 1 {
        CoverMode::Exact
    } else {
        CoverMode::Over
    };
    FilamentCover::new(
        graph,
        paths,
        config.objective,
        config.roughness_kind,
        mode,
        stats,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeRecord;
    use proptest::prelude::*;

    fn tree(parents: &[usize], weights: &[f64]) -> WeightedGeometricGraph {
        let n = parents.len() + 1;
        let nodes = (0..n)
            .map(|i| NodeRecord {
                id: i as i64,
                position: vec![i as f64, (i * i % 7) as f64],
            })
            .collect();
        let edges = parents
            .iter()
            .enumerate()
            .map(|(i, &p)| (p as i64, i as i64 + 1, weights[i]))
            .collect();
        WeightedGeometricGraph::new(nodes, edges).unwrap()
    }

    /// Edge sets of all simple paths, by brute-force search from every node.
    fn all_paths(g: &WeightedGeometricGraph) -> Vec<(Vec<usize>, f64, f64)> {
        let mut out = Vec::new();
        for s in 0..g.node_count() {
            let mut stack = vec![(s, usize::MAX, Vec::<usize>::new())];
            while let Some((u, from, edges)) = stack.pop() {
                if !edges.is_empty() && s < u {
                    let w: Vec<f64> = edges.iter().map(|&e| g.weight(e)).collect();
                    out.push((
                        edges.clone(),
                        RoughnessKind::Pair.of_weights(&w),
                        RoughnessKind::All.of_weights(&w),
                    ));
                }
                for &(v, e) in g.incident(u) {
                    if v != from {
                        let mut next = edges.clone();
                        next.push(e);
                        stack.push((v, u, next));
                    }
                }
            }
        }
        out
    }

    fn brute(
        g: &WeightedGeometricGraph,
        k: usize,
        kind: RoughnessKind,
        objective: Objective,
    ) -> f64 {
        let paths = all_paths(g);
        let mut best = f64::INFINITY;
        for mask in 1u64..(1 << paths.len()) {
            let mut count = vec![0; g.edge_count()];
            let mut total = 0.0;
            let mut m = 0;
            for (i, (edges, rp, ra)) in paths.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for &e in edges {
                        count[e] += 1;
                    }
                    total += if kind == RoughnessKind::Pair { rp } else { ra };
                    m += 1;
                }
            }
            if count.iter().all(|&c| c >= 1 && c <= k) {
                let v = if objective == Objective::Avg {
                    total / m as f64
                } else {
                    total
                };
                best = best.min(v);
            }
        }
        best
    }

    fn cfg(k: usize, objective: Objective, kind: RoughnessKind) -> TreeCoverConfig {
        TreeCoverConfig {
            k_overlap: k,
            objective,
            roughness_kind: kind,
        }
    }

    #[test]
    fn line_is_one_path() {
        let g = tree(&[0, 1, 2], &[1.0, 1.0, 1.0]);
        let c = solve_tree(&g, &TreeCoverConfig::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.objective_value, 0.0);
    }

    #[test]
    fn star_pairs_similar_arms() {
        let g = tree(&[0, 0, 0, 0], &[1.0, 5.0, 1.1, 5.2]);
        let c = solve_tree(&g, &TreeCoverConfig::default()).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c.objective_value - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_trees_and_bad_k() {
        let nodes = (0..3)
            .map(|i| NodeRecord {
                id: i,
                position: vec![i as f64, 0.0],
            })
            .collect();
        let cycle = WeightedGeometricGraph::new(nodes, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
            .unwrap();
        assert!(matches!(
            solve_tree(&cycle, &TreeCoverConfig::default()),
            Err(Error::NotATree(_))
        ));
        let g = tree(&[0], &[1.0]);
        assert!(matches!(
            solve_tree(&g, &cfg(0, Objective::Total, RoughnessKind::Pair)),
            Err(Error::KTooLarge(0))
        ));
        assert!(matches!(
            solve_tree(&g, &cfg(4, Objective::Total, RoughnessKind::Pair)),
            Err(Error::KTooLarge(4))
        ));
    }

    #[test]
    fn overlap_helps_on_a_cross() {
        // Two straight lines sharing the centre node of a star with unequal
        // arms; k = 2 never does worse than k = 1.
        let g = tree(&[0, 0, 0, 0], &[1.0, 1.0, 2.0, 2.0]);
        let one = solve_tree(&g, &TreeCoverConfig::default())
            .unwrap()
            .objective_value;
        let two = solve_tree(&g, &cfg(2, Objective::Total, RoughnessKind::Pair))
            .unwrap()
            .objective_value;
        assert!(two <= one + 1e-12);
    }

    fn arb_tree() -> impl Strategy<Value = (Vec<usize>, Vec<f64>)> {
        (2usize..6).prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            (parents, prop::collection::vec(0.1f64..10.0, n - 1))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        #[test]
        fn matches_brute_force((parents, weights) in arb_tree(), k in 1usize..4, avg in any::<bool>(), all in any::<bool>()) {
            let g = tree(&parents, &weights);
            let objective = if avg { Objective::Avg } else { Objective::Total };
            let kind = if all { RoughnessKind::All } else { RoughnessKind::Pair };
            let c = solve_tree(&g, &cfg(k, objective, kind)).unwrap();
            let expected = brute(&g, k, kind, objective);
            prop_assert!((c.objective_value - expected).abs() <= 1e-9, "{} vs {}", c.objective_value, expected);
            for e in 0..g.edge_count() {
                let n = c.labels.labels(e).len();
                prop_assert!(n >= 1 && n <= k);
            }
        }
    }
}
