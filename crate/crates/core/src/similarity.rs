//! Partition similarity: variation of information, Rand and Jaccard
//! indices, their structure-aware variants restricted to edge pairs within
//! a line-graph distance `d`, and optimal filament identity matching.
//!
//! With overlapping partitions a pair of edges counts as "same filament"
//! when their label sets intersect.

use std::collections::{BTreeMap, HashMap};

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{line_graph, EdgePartition, WeightedGeometricGraph};

/// Pair counts: `h_ee` same in both, `h_en` same in `a` only, `h_ne` same in
/// `b` only, `h_nn` different in both. `d = None` means unbounded distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ContingencyCounts {
    pub h_ee: u64,
    pub h_en: u64,
    pub h_ne: u64,
    pub h_nn: u64,
    pub d: Option<u32>,
}

impl ContingencyCounts {
    pub fn total(&self) -> u64 {
        self.h_ee + self.h_en + self.h_ne + self.h_nn
    }

    /// Rand index; 1 when no pair is admissible.
    pub fn rand(&self) -> f64 {
        ratio(self.h_ee + self.h_nn, self.total())
    }

    /// Jaccard index; 1 when no pair is "same" in either partition.
    pub fn jaccard(&self) -> f64 {
        ratio(self.h_ee, self.h_ee + self.h_en + self.h_ne)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    /// `None` when either partition overlaps.
    pub vi: Option<f64>,
    pub ri: f64,
    pub ji: f64,
    /// Keyed by `d`; `None` is the unbounded distance.
    pub ri_d: BTreeMap<Option<u32>, f64>,
    pub ji_d: BTreeMap<Option<u32>, f64>,
}

fn check_same_edges(a: &EdgePartition, b: &EdgePartition) -> Result<()> {
    if a.edge_count() != b.edge_count() {
        return Err(Error::MismatchedEdgeSets {
            left: a.edge_count(),
            right: b.edge_count(),
        });
    }
    Ok(())
}

/// Label → edge count intersection table `g[(i, j)] = |C_i ∩ C'_j|`.
fn overlap_table(a: &EdgePartition, b: &EdgePartition) -> BTreeMap<(u32, u32), u64> {
    let mut g = BTreeMap::new();
    for e in 0..a.edge_count() {
        for &i in a.labels(e) {
            for &j in b.labels(e) {
                *g.entry((i, j)).or_insert(0) += 1;
            }
        }
    }
    g
}

/// Normalized variation of information in `[0, 1]` with 1 for identical
/// partitions; `None` if either partition overlaps.
pub fn variation_of_information(a: &EdgePartition, b: &EdgePartition) -> Option<f64> {
    if a.is_overlapping() || b.is_overlapping() || a.edge_count() != b.edge_count() {
        return None;
    }
    let u = a.edge_count() as f64;
    if a.edge_count() <= 1 {
        return Some(1.0);
    }
    let g = overlap_table(a, b);
    let mut row: HashMap<u32, f64> = HashMap::new();
    let mut col: HashMap<u32, f64> = HashMap::new();
    for (&(i, j), &n) in &g {
        *row.entry(i).or_default() += n as f64;
        *col.entry(j).or_default() += n as f64;
    }
    let sum: f64 = g
        .iter()
        .map(|(&(i, j), &n)| {
            let n = n as f64;
            n * ((n / col[&j]).ln() + (n / row[&i]).ln())
        })
        .sum();
    Some(1.0 + sum / (u * u.ln()))
}

/// Classifies every unordered pair of distinct edges within line-graph
/// distance `d` (all pairs for `d = None`).
pub fn rand_jaccard(
    a: &EdgePartition,
    b: &EdgePartition,
    d: Option<u32>,
    graph: Option<&WeightedGeometricGraph>,
) -> Result<(f64, f64, ContingencyCounts)> {
    check_same_edges(a, b)?;
    let mut counts = ContingencyCounts {
        h_ee: 0,
        h_en: 0,
        h_ne: 0,
        h_nn: 0,
        d,
    };
    let mut classify = |x: usize, y: usize| match (a.same_filament(x, y), b.same_filament(x, y)) {
        (true, true) => counts.h_ee += 1,
        (true, false) => counts.h_en += 1,
        (false, true) => counts.h_ne += 1,
        (false, false) => counts.h_nn += 1,
    };
    let n = a.edge_count();
    match d {
        None => {
            for x in 0..n {
                for y in x + 1..n {
                    classify(x, y);
                }
            }
        }
        Some(0) => return Err(Error::Config("distance d must be at least 1".into())),
        Some(d) => {
            let graph = graph.ok_or_else(|| Error::Config("finite d requires the graph".into()))?;
            if graph.edge_count() != n {
                return Err(Error::MismatchedEdgeSets {
                    left: n,
                    right: graph.edge_count(),
                });
            }
            let lg = line_graph(graph);
            for x in 0..n {
                let dist = lg.distances_from(x, Some(d));
                for (y, dy) in dist.iter().enumerate().skip(x + 1) {
                    if dy.is_some() {
                        classify(x, y);
                    }
                }
            }
        }
    }
    Ok((counts.rand(), counts.jaccard(), counts))
}

/// VI, RI, JI and the structure-aware indices for each requested `d`.
pub fn similarity_report(
    a: &EdgePartition,
    b: &EdgePartition,
    graph: Option<&WeightedGeometricGraph>,
    ds: &[Option<u32>],
) -> Result<SimilarityReport> {
    check_same_edges(a, b)?;
    let (ri, ji, _) = rand_jaccard(a, b, None, graph)?;
    let mut report = SimilarityReport {
        vi: variation_of_information(a, b),
        ri,
        ji,
        ri_d: BTreeMap::new(),
        ji_d: BTreeMap::new(),
    };
    for &d in ds {
        let (r, j, _) = rand_jaccard(a, b, d, graph)?;
        report.ri_d.insert(d, r);
        report.ji_d.insert(d, j);
    }
    Ok(report)
}

/// One-to-one correspondence between filament labels of two partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// `(label in a, label in b)`, sorted by the `a` label.
    pub pairs: Vec<(u32, u32)>,
    /// Total number of edges shared by matched filaments.
    pub shared: u64,
}

/// Matching of labels maximizing the total number of shared edges. Pairs
/// sharing no edge are left unmatched.
pub fn match_filament_identities(a: &EdgePartition, b: &EdgePartition) -> Matching {
    let la: Vec<u32> = a.filaments().into_keys().collect();
    let lb: Vec<u32> = b.filaments().into_keys().collect();
    if la.is_empty() || lb.is_empty() || a.edge_count() != b.edge_count() {
        return Matching {
            pairs: Vec::new(),
            shared: 0,
        };
    }
    let g = overlap_table(a, b);
    let ia: HashMap<u32, usize> = la.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let ib: HashMap<u32, usize> = lb.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let transpose = la.len() > lb.len();
    let (rows, cols) = if transpose {
        (lb.len(), la.len())
    } else {
        (la.len(), lb.len())
    };
    let mut m = Matrix::new(rows, cols, 0i64);
    for (&(i, j), &n) in &g {
        let (r, c) = if transpose {
            (ib[&j], ia[&i])
        } else {
            (ia[&i], ib[&j])
        };
        m[(r, c)] = n as i64;
    }
    let (_, assignment) = kuhn_munkres(&m);
    let mut pairs = Vec::new();
    let mut shared = 0;
    for (r, &c) in assignment.iter().enumerate() {
        let n = m[(r, c)];
        if n > 0 {
            shared += n as u64;
            pairs.push(if transpose {
                (la[c], lb[r])
            } else {
                (la[r], lb[c])
            });
        }
    }
    pairs.sort_unstable();
    Matching { pairs, shared }
}

/// Renames the labels of `b` to their matched labels in `a`; unmatched
/// labels get fresh identities above every label of `a`.
pub fn recolor(a: &EdgePartition, b: &EdgePartition) -> EdgePartition {
    let matching = match_filament_identities(a, b);
    let mut map: HashMap<u32, u32> = matching.pairs.iter().map(|&(x, y)| (y, x)).collect();
    let mut next = a.max_label().map_or(0, |m| m + 1);
    for l in b.filaments().into_keys() {
        map.entry(l).or_insert_with(|| {
            next += 1;
            next - 1
        });
    }
    b.relabeled(|l| map[&l])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeRecord;

    fn path_graph(n_edges: usize) -> WeightedGeometricGraph {
        let nodes = (0..=n_edges)
            .map(|i| NodeRecord {
                id: i as i64,
                position: vec![i as f64, 0.0],
            })
            .collect();
        let edges = (0..n_edges)
            .map(|i| (i as i64, i as i64 + 1, 1.0))
            .collect();
        WeightedGeometricGraph::new(nodes, edges).unwrap()
    }

    #[test]
    fn vi_identity_and_hand_value() {
        let a = EdgePartition::from_assignment(&[0, 0, 1]);
        assert_eq!(variation_of_information(&a, &a), Some(1.0));
        let b = EdgePartition::from_assignment(&[0, 1, 1]);
        // g = [[1,1],[0,1]]: three nonzero cells contribute −ln2, −2ln2, −ln2.
        let expected = 1.0 - 4.0 * 2f64.ln() / (3.0 * 3f64.ln());
        assert!((variation_of_information(&a, &b).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn vi_undefined_with_overlap() {
        let a = EdgePartition::from_assignment(&[0, 0, 1]);
        let b = EdgePartition::new(vec![vec![0], vec![0, 1], vec![1]]).unwrap();
        assert_eq!(variation_of_information(&a, &b), None);
        assert_eq!(variation_of_information(&b, &b), None);
    }

    #[test]
    fn adjacent_pair_table_on_path() {
        let g = path_graph(4);
        let a = EdgePartition::from_assignment(&[0, 0, 1, 1]);
        let b = EdgePartition::from_assignment(&[0, 0, 0, 1]);
        let (ri, ji, h) = rand_jaccard(&a, &b, Some(1), Some(&g)).unwrap();
        // (e1,e2): same/same; (e2,e3): diff/same; (e3,e4): same/diff.
        assert_eq!((h.h_ee, h.h_en, h.h_ne, h.h_nn), (1, 1, 1, 0));
        assert!((ji - 1.0 / 3.0).abs() < 1e-15);
        assert!((ri - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn infinite_distance_is_classical() {
        let g = path_graph(5);
        let a = EdgePartition::from_assignment(&[0, 0, 1, 1, 2]);
        let b = EdgePartition::new(vec![vec![0], vec![0, 1], vec![1], vec![1], vec![1]]).unwrap();
        let (ri, ji, h) = rand_jaccard(&a, &b, None, None).unwrap();
        assert_eq!(h.total(), 10);
        let (ri4, ji4, h4) = rand_jaccard(&a, &b, Some(4), Some(&g)).unwrap();
        assert_eq!(
            (h.h_ee, h.h_en, h.h_ne, h.h_nn),
            (h4.h_ee, h4.h_en, h4.h_ne, h4.h_nn)
        );
        assert_eq!((ri, ji), (ri4, ji4));
    }

    #[test]
    fn mismatched_partitions() {
        let a = EdgePartition::from_assignment(&[0, 0]);
        let b = EdgePartition::from_assignment(&[0, 0, 0]);
        assert!(matches!(
            rand_jaccard(&a, &b, None, None),
            Err(Error::MismatchedEdgeSets { .. })
        ));
    }

    #[test]
    fn two_by_two_matching() {
        let a = EdgePartition::from_assignment(&[7, 7, 3]);
        let b = EdgePartition::from_assignment(&[1, 1, 9]);
        let m = match_filament_identities(&a, &b);
        assert_eq!(m.pairs, vec![(3, 9), (7, 1)]);
        assert_eq!(m.shared, 3);
        let same = match_filament_identities(&a, &a);
        assert_eq!(same.pairs, vec![(3, 3), (7, 7)]);
        assert_eq!(same.shared, 3);
    }

    #[test]
    fn matching_with_unequal_label_counts() {
        let a = EdgePartition::from_assignment(&[0, 0, 0, 0]);
        let b = EdgePartition::from_assignment(&[5, 5, 6, 7]);
        let m = match_filament_identities(&a, &b);
        assert_eq!(m.pairs, vec![(0, 5)]);
        let r = recolor(&a, &b);
        assert_eq!(r.labels(0), &[0]);
        assert!(r.labels(2)[0] >= 1 && r.labels(3)[0] >= 1 && r.labels(2) != r.labels(3));
    }
}
