//! Exact weighted set cover / set partitioning by best-first
//! branch-and-bound.
//!
//! Bounds come from a Lagrangian relaxation of the covering rows optimized
//! by subgradient steps; multipliers are inherited from parent to child.
//! Incumbents come from a lazy greedy heuristic seeded with the sets the
//! relaxation selects. Nodes are stored as chains of fixing decisions and
//! their state is rebuilt when they are popped.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::rc::Rc;

use crate::error::{Error, Result};

const ROOT_ITERATIONS: usize = 200;
const NODE_ITERATIONS: usize = 40;

/// A set-cover instance. Sets are lists of element indices.
pub(crate) struct Problem<'a> {
    pub n_elems: usize,
    pub sets: &'a [Vec<usize>],
    pub costs: &'a [f64],
    /// Partitioning (every element exactly once) instead of covering.
    pub exact: bool,
    pub node_limit: u64,
    pub opt_tol: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    /// Indices into the problem's sets, ascending.
    pub chosen: Vec<usize>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub objective: f64,
    pub nodes: u64,
}

/// Classical greedy by cost per newly covered element. In partitioning mode
/// only sets disjoint from the covered elements are eligible.
pub(crate) fn greedy(problem: &Problem) -> Result<Solution> {
    let solver = Solver::new(problem)?;
    let mut st = solver.root_state().ok_or_else(|| solver.infeasible())?;
    if !solver.greedy_complete(&mut st) {
        return Err(solver.infeasible());
    }
    if !solver.exact {
        solver.drop_redundant(&mut st);
    }
    Ok(solver.solution(&st, 0))
}

/// Proven-optimal cover within the absolute tolerance described on
/// [`Solver::tol`]. Among equally good covers the first one found in the
/// deterministic search order is returned.
pub(crate) fn solve(problem: &Problem) -> Result<Solution> {
    Solver::new(problem)?.run()
}

#[derive(Clone)]
struct State {
    /// 0 free, 1 selected, 2 excluded.
    status: Vec<u8>,
    cover: Vec<u32>,
    uncovered: usize,
    cost: f64,
    chosen: Vec<usize>,
}

struct Link {
    parent: Option<Rc<Link>>,
    decisions: Vec<(usize, bool)>,
}

struct Node {
    lb: f64,
    seq: u64,
    link: Option<Rc<Link>>,
    multipliers: Rc<Vec<f64>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lb.total_cmp(&other.lb).then(self.seq.cmp(&other.seq))
    }
}

struct Lagrange {
    bound: f64,
    u: Vec<f64>,
    /// (set, reduced cost) for every free set touching an uncovered element.
    reduced: Vec<(usize, f64)>,
}

struct Solver {
    n: usize,
    sets: Vec<Vec<usize>>,
    costs: Vec<f64>,
    /// Local set index → index in the caller's problem.
    original: Vec<usize>,
    elem_sets: Vec<Vec<usize>>,
    exact: bool,
    node_limit: u64,
    opt_tol: f64,
    cost_scale: f64,
    forced: Vec<usize>,
    uncoverable: Vec<usize>,
}

impl Solver {
    fn new(p: &Problem) -> Result<Self> {
        assert_eq!(p.sets.len(), p.costs.len());
        if let Some(c) = p.costs.iter().find(|c| !c.is_finite()) {
            return Err(Error::NumericalFailure(format!("non-finite set cost {c}")));
        }
        // Dominance: among sets with identical elements keep the cheapest
        // (lowest index on ties).
        let mut best: HashMap<Vec<usize>, usize> = HashMap::new();
        for (i, s) in p.sets.iter().enumerate() {
            if s.is_empty() {
                continue;
            }
            let mut key = s.clone();
            key.sort_unstable();
            key.dedup();
            debug_assert!(key.iter().all(|&e| e < p.n_elems));
            match best.get(&key) {
                Some(&j) if p.costs[j] <= p.costs[i] => {}
                _ => {
                    best.insert(key, i);
                }
            }
        }
        let mut kept: Vec<(usize, Vec<usize>)> = best.into_iter().map(|(k, i)| (i, k)).collect();
        kept.sort_unstable_by_key(|(i, _)| *i);
        let original: Vec<usize> = kept.iter().map(|(i, _)| *i).collect();
        let costs: Vec<f64> = original.iter().map(|&i| p.costs[i]).collect();
        let sets: Vec<Vec<usize>> = kept.into_iter().map(|(_, s)| s).collect();
        let mut elem_sets = vec![Vec::new(); p.n_elems];
        for (s, elems) in sets.iter().enumerate() {
            for &e in elems {
                elem_sets[e].push(s);
            }
        }
        let uncoverable: Vec<usize> = (0..p.n_elems)
            .filter(|&e| elem_sets[e].is_empty())
            .collect();
        // With inequality rows a negative-cost set lowers every cover it is
        // added to, so it belongs to every optimum.
        let forced = if p.exact {
            Vec::new()
        } else {
            (0..sets.len()).filter(|&s| costs[s] < 0.0).collect()
        };
        let cost_scale = costs.iter().fold(0.0f64, |m, c| m.max(c.abs())) * p.n_elems.max(1) as f64;
        Ok(Self {
            n: p.n_elems,
            sets,
            costs,
            original,
            elem_sets,
            exact: p.exact,
            node_limit: p.node_limit,
            opt_tol: p.opt_tol,
            cost_scale,
            forced,
            uncoverable,
        })
    }

    fn infeasible(&self) -> Error {
        Error::InfeasibleExactCover {
            uncoverable: self.uncoverable.clone(),
        }
    }

    /// Absolute pruning tolerance: the configured optimality tolerance plus
    /// a few ulps of the objective magnitude, so large cost offsets do not
    /// turn rounding noise into spurious branching.
    fn tol(&self, ub: f64) -> f64 {
        let scale = if ub.is_finite() {
            ub.abs()
        } else {
            self.cost_scale
        };
        self.opt_tol + 64.0 * f64::EPSILON * scale.max(1.0)
    }

    fn empty_state(&self) -> State {
        State {
            status: vec![0; self.sets.len()],
            cover: vec![0; self.n],
            uncovered: self.n,
            cost: 0.0,
            chosen: Vec::new(),
        }
    }

    fn select(&self, st: &mut State, s: usize) -> bool {
        match st.status[s] {
            1 => return true,
            2 => return false,
            _ => {}
        }
        if self.exact && self.sets[s].iter().any(|&e| st.cover[e] > 0) {
            return false;
        }
        st.status[s] = 1;
        st.cost += self.costs[s];
        st.chosen.push(s);
        for &e in &self.sets[s] {
            if st.cover[e] == 0 {
                st.uncovered -= 1;
            }
            st.cover[e] += 1;
            if self.exact {
                for &t in &self.elem_sets[e] {
                    if st.status[t] == 0 {
                        st.status[t] = 2;
                    }
                }
            }
        }
        true
    }

    fn exclude(&self, st: &mut State, s: usize) -> bool {
        match st.status[s] {
            1 => false,
            _ => {
                st.status[s] = 2;
                true
            }
        }
    }

    /// Selects sets that are the only remaining option for some element.
    /// Returns the element that can no longer be covered, if any.
    fn propagate(&self, st: &mut State) -> std::result::Result<(), usize> {
        loop {
            let mut changed = false;
            for e in 0..self.n {
                if st.cover[e] > 0 {
                    continue;
                }
                let mut only = None;
                let mut count = 0;
                for &s in &self.elem_sets[e] {
                    if st.status[s] == 0 {
                        count += 1;
                        only = Some(s);
                        if count > 1 {
                            break;
                        }
                    }
                }
                match count {
                    0 => return Err(e),
                    1 => {
                        let s = only.expect("counted");
                        if !self.select(st, s) {
                            return Err(e);
                        }
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn root_state(&self) -> Option<State> {
        if !self.uncoverable.is_empty() {
            return None;
        }
        let mut st = self.empty_state();
        for &s in &self.forced {
            if !self.select(&mut st, s) {
                return None;
            }
        }
        self.propagate(&mut st).ok()?;
        Some(st)
    }

    /// Lazy greedy completion by cost per newly covered element; ties go
    /// to the set covering more new elements, then to the lower index.
    fn greedy_complete(&self, st: &mut State) -> bool {
        let gain = |st: &State, s: usize| -> Option<(OrdF64, Reverse<usize>)> {
            if st.status[s] != 0 {
                return None;
            }
            let mut new = 0usize;
            for &e in &self.sets[s] {
                if st.cover[e] == 0 {
                    new += 1;
                } else if self.exact {
                    return None;
                }
            }
            (new > 0).then(|| (OrdF64(self.costs[s] / new as f64), Reverse(new)))
        };
        let mut heap = BinaryHeap::new();
        for s in 0..self.sets.len() {
            if let Some(k) = gain(st, s) {
                heap.push(Reverse((k, s)));
            }
        }
        while st.uncovered > 0 {
            let Some(Reverse((k, s))) = heap.pop() else {
                return false;
            };
            match gain(st, s) {
                None => continue,
                Some(now) if now != k => {
                    heap.push(Reverse((now, s)));
                    continue;
                }
                Some(_) => {}
            }
            self.select(st, s);
        }
        true
    }

    /// Removes selected sets whose elements are all covered twice, most
    /// expensive first. Only meaningful for covering rows.
    fn drop_redundant(&self, st: &mut State) {
        let mut order = st.chosen.clone();
        order.sort_by(|&a, &b| self.costs[b].total_cmp(&self.costs[a]).then(b.cmp(&a)));
        for s in order {
            if self.costs[s] >= 0.0 && self.sets[s].iter().all(|&e| st.cover[e] >= 2) {
                for &e in &self.sets[s] {
                    st.cover[e] -= 1;
                }
                st.status[s] = 2;
                st.cost -= self.costs[s];
                st.chosen.retain(|&t| t != s);
            }
        }
    }

    fn solution(&self, st: &State, nodes: u64) -> Solution {
        let mut chosen: Vec<usize> = st.chosen.iter().map(|&s| self.original[s]).collect();
        chosen.sort_unstable();
        let objective = st.chosen.iter().map(|&s| self.costs[s]).sum();
        Solution {
            chosen,
            objective,
            nodes,
        }
    }

    fn rebuild(&self, root: &State, link: &Option<Rc<Link>>) -> Option<State> {
        let mut chain = Vec::new();
        let mut cur = link.clone();
        while let Some(l) = cur {
            chain.push(l.clone());
            cur = l.parent.clone();
        }
        let mut st = root.clone();
        for l in chain.iter().rev() {
            for &(s, take) in &l.decisions {
                let ok = if take {
                    self.select(&mut st, s)
                } else {
                    self.exclude(&mut st, s)
                };
                if !ok {
                    return None;
                }
            }
        }
        Some(st)
    }

    fn initial_multipliers(&self, st: &State) -> Vec<f64> {
        let mut u = vec![0.0; self.n];
        for (e, ue) in u.iter_mut().enumerate() {
            if st.cover[e] > 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            for &s in &self.elem_sets[e] {
                if st.status[s] == 0 {
                    let k = self.sets[s].iter().filter(|&&f| st.cover[f] == 0).count();
                    best = best.min(self.costs[s] / k as f64);
                }
            }
            *ue = if self.exact { best } else { best.max(0.0) };
        }
        u
    }

    fn lagrangian(&self, st: &State, mut u: Vec<f64>, iterations: usize, ub: f64) -> Lagrange {
        let free: Vec<usize> = (0..self.sets.len())
            .filter(|&s| st.status[s] == 0 && self.sets[s].iter().any(|&e| st.cover[e] == 0))
            .collect();
        for (ue, &c) in u.iter_mut().zip(&st.cover) {
            if c > 0 {
                *ue = 0.0;
            }
        }
        let tol = self.tol(ub);
        let evaluate = |u: &[f64]| -> (f64, Vec<f64>) {
            let mut bound = st.cost
                + u.iter()
                    .zip(&st.cover)
                    .filter(|(_, &c)| c == 0)
                    .map(|(ue, _)| ue)
                    .sum::<f64>();
            let mut rc = Vec::with_capacity(free.len());
            for &s in &free {
                let r = self.costs[s]
                    - self.sets[s]
                        .iter()
                        .filter(|&&e| st.cover[e] == 0)
                        .map(|&e| u[e])
                        .sum::<f64>();
                if r < 0.0 {
                    bound += r;
                }
                rc.push(r);
            }
            (bound, rc)
        };
        let (mut bound, mut rc) = evaluate(&u);
        let mut best = Lagrange {
            bound,
            u: u.clone(),
            reduced: free.iter().copied().zip(rc.iter().copied()).collect(),
        };
        let mut mu = 2.0;
        let mut stall = 0;
        let mut g = vec![0.0f64; self.n];
        for _ in 0..iterations {
            if best.bound >= ub - tol {
                break;
            }
            for (ge, &c) in g.iter_mut().zip(&st.cover) {
                *ge = if c == 0 { 1.0 } else { 0.0 };
            }
            for (i, &s) in free.iter().enumerate() {
                if rc[i] < 0.0 {
                    for &e in &self.sets[s] {
                        if st.cover[e] == 0 {
                            g[e] -= 1.0;
                        }
                    }
                }
            }
            if !self.exact {
                for e in 0..self.n {
                    if u[e] <= 0.0 && g[e] < 0.0 {
                        g[e] = 0.0;
                    }
                }
            }
            let norm: f64 = g.iter().map(|x| x * x).sum();
            if norm == 0.0 {
                break;
            }
            let target = if ub.is_finite() {
                ub
            } else {
                best.bound + 0.1 * (1.0 + best.bound.abs())
            };
            let step = mu * (target - bound).max(1e-6 * (1.0 + bound.abs())) / norm;
            for e in 0..self.n {
                u[e] += step * g[e];
                if !self.exact && u[e] < 0.0 {
                    u[e] = 0.0;
                }
            }
            (bound, rc) = evaluate(&u);
            if bound > best.bound + 1e-12 * (1.0 + best.bound.abs()) {
                best = Lagrange {
                    bound,
                    u: u.clone(),
                    reduced: free.iter().copied().zip(rc.iter().copied()).collect(),
                };
                stall = 0;
            } else {
                stall += 1;
                if stall >= 5 {
                    mu /= 2.0;
                    stall = 0;
                    if mu < 1e-5 {
                        break;
                    }
                }
            }
        }
        best
    }

    /// Builds a cover from the relaxation's selection, completes it
    /// greedily and (for covering rows) strips redundant sets.
    fn repair(&self, st: &State, lag: &Lagrange) -> Option<State> {
        let mut st = st.clone();
        let mut seeds: Vec<(usize, f64)> = lag
            .reduced
            .iter()
            .copied()
            .filter(|&(_, r)| r < 0.0)
            .collect();
        seeds.sort_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then(self.sets[b.0].len().cmp(&self.sets[a.0].len()))
                .then(a.0.cmp(&b.0))
        });
        for (s, _) in seeds {
            if st.uncovered == 0 {
                break;
            }
            if st.status[s] != 0 || !self.sets[s].iter().any(|&e| st.cover[e] == 0) {
                continue;
            }
            self.select(&mut st, s);
        }
        if !self.greedy_complete(&mut st) {
            return None;
        }
        if !self.exact {
            self.drop_redundant(&mut st);
        }
        Some(st)
    }

    fn run(self) -> Result<Solution> {
        let mut dead: BTreeSet<usize> = self.uncoverable.iter().copied().collect();
        let Some(root) = self.root_state() else {
            if dead.is_empty() {
                // Propagation failed at the root; report the culprit.
                let mut st = self.empty_state();
                for &s in &self.forced {
                    self.select(&mut st, s);
                }
                if let Err(e) = self.propagate(&mut st) {
                    dead.insert(e);
                }
            }
            return Err(Error::InfeasibleExactCover {
                uncoverable: dead.into_iter().collect(),
            });
        };

        let mut ub = f64::INFINITY;
        let mut incumbent: Option<State> = None;
        let mut greedy_state = root.clone();
        if self.greedy_complete(&mut greedy_state) {
            if !self.exact {
                self.drop_redundant(&mut greedy_state);
            }
            ub = greedy_state.cost;
            incumbent = Some(greedy_state);
        }

        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        heap.push(Reverse(Node {
            lb: f64::NEG_INFINITY,
            seq,
            link: None,
            multipliers: Rc::new(self.initial_multipliers(&root)),
        }));
        let mut nodes = 0u64;
        while let Some(Reverse(node)) = heap.pop() {
            if node.lb >= ub - self.tol(ub) {
                continue;
            }
            nodes += 1;
            if nodes > self.node_limit {
                let open_lb = std::iter::once(node.lb)
                    .chain(heap.iter().map(|Reverse(n)| n.lb))
                    .fold(f64::INFINITY, f64::min);
                return Err(Error::NodeLimitExceeded {
                    limit: self.node_limit,
                    incumbent: incumbent.as_ref().map(|s| s.cost),
                    gap: incumbent.as_ref().map(|s| (s.cost - open_lb).max(0.0)),
                });
            }
            let Some(mut st) = self.rebuild(&root, &node.link) else {
                continue;
            };
            if let Err(e) = self.propagate(&mut st) {
                dead.insert(e);
                continue;
            }
            if st.uncovered == 0 {
                if st.cost < ub - self.tol(ub) {
                    ub = st.cost;
                    incumbent = Some(st);
                }
                continue;
            }
            let is_root = node.link.is_none();
            let iterations = if is_root {
                ROOT_ITERATIONS
            } else {
                NODE_ITERATIONS
            };
            let start_u = if is_root {
                (*node.multipliers).clone()
            } else {
                let mut u = (*node.multipliers).clone();
                // Fresh elements keep their inherited value; a non-finite
                // value (no free set) cannot occur after propagation.
                for x in u.iter_mut() {
                    if !x.is_finite() {
                        *x = 0.0;
                    }
                }
                u
            };
            let lag = self.lagrangian(&st, start_u, iterations, ub);
            if let Some(h) = self.repair(&st, &lag) {
                if h.cost < ub - self.tol(ub) {
                    ub = h.cost;
                    incumbent = Some(h);
                }
            }
            let tol = self.tol(ub);
            if lag.bound >= ub - tol {
                continue;
            }

            // Reduced-cost fixing.
            let mut decisions = Vec::new();
            if ub.is_finite() {
                for &(s, r) in &lag.reduced {
                    if r >= 0.0 && lag.bound + r >= ub - tol {
                        decisions.push((s, false));
                    } else if r < 0.0 && lag.bound - r >= ub - tol {
                        decisions.push((s, true));
                    }
                }
            }
            let mut feasible = true;
            for &(s, take) in &decisions {
                let ok = if take {
                    self.select(&mut st, s)
                } else {
                    self.exclude(&mut st, s)
                };
                if !ok {
                    feasible = false;
                    break;
                }
            }
            if !feasible {
                continue;
            }
            if let Err(e) = self.propagate(&mut st) {
                dead.insert(e);
                continue;
            }
            if st.uncovered == 0 {
                if st.cost < ub - self.tol(ub) {
                    ub = st.cost;
                    incumbent = Some(st);
                }
                continue;
            }

            // Branch on the uncovered element with the fewest free sets.
            let mut pick: Option<(usize, usize)> = None;
            for e in 0..self.n {
                if st.cover[e] > 0 {
                    continue;
                }
                let count = self.elem_sets[e]
                    .iter()
                    .filter(|&&s| st.status[s] == 0)
                    .count();
                if pick.is_none_or(|(_, c)| count < c) {
                    pick = Some((e, count));
                }
            }
            let (e, _) = pick.expect("some element is uncovered");
            let mut options: Vec<usize> = self.elem_sets[e]
                .iter()
                .copied()
                .filter(|&s| st.status[s] == 0)
                .collect();
            options.sort_by(|&a, &b| {
                self.costs[a]
                    .total_cmp(&self.costs[b])
                    .then(self.sets[b].len().cmp(&self.sets[a].len()))
                    .then(a.cmp(&b))
            });
            let parent = Some(Rc::new(Link {
                parent: node.link.clone(),
                decisions,
            }));
            let multipliers = Rc::new(lag.u);
            for (j, &s) in options.iter().enumerate() {
                let mut d: Vec<(usize, bool)> = options[..j].iter().map(|&t| (t, false)).collect();
                d.push((s, true));
                seq += 1;
                heap.push(Reverse(Node {
                    lb: lag.bound,
                    seq,
                    link: Some(Rc::new(Link {
                        parent: parent.clone(),
                        decisions: d,
                    })),
                    multipliers: multipliers.clone(),
                }));
            }
        }
        match incumbent {
            Some(st) => Ok(self.solution(&st, nodes)),
            None => Err(Error::InfeasibleExactCover {
                uncoverable: dead.into_iter().collect(),
            }),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}
