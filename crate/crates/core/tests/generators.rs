use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use filacover::generators::{
    enumerate_small_instances, fixture_contrived, random_filament_network, random_geometric_tree,
    random_overlapping_tree_cover, SMALL_CORPUS_SIZE,
};
use filacover::gml::{load_gml, save_graph, CoordinateMode};
use filacover::{FilamentPath, WeightedGeometricGraph};
use proptest::prelude::*;

fn degrees(g: &WeightedGeometricGraph) -> Vec<usize> {
    let mut d: Vec<usize> = (0..g.node_count()).map(|n| g.degree(n)).collect();
    d.sort_unstable();
    d
}

fn round_trip(g: &WeightedGeometricGraph) -> WeightedGeometricGraph {
    let mut buf = Vec::new();
    save_graph(g, None, &mut buf).unwrap();
    load_gml(buf.as_slice(), CoordinateMode::Geometric)
        .unwrap()
        .graph
}

/// Orders a connected edge set into a walk, or `None` if it is not a
/// single path or cycle.
fn as_walk(g: &WeightedGeometricGraph, edges: &[usize]) -> Option<FilamentPath> {
    let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in edges {
        let (a, b) = g.edge(e).endpoints();
        *degree.entry(a).or_default() += 1;
        *degree.entry(b).or_default() += 1;
    }
    if degree.values().any(|&d| d > 2) {
        return None;
    }
    let mut at = degree
        .iter()
        .find(|(_, &d)| d == 1)
        .map(|(&n, _)| n)
        .unwrap_or_else(|| g.edge(edges[0]).endpoints().0);
    let mut left = edges.to_vec();
    let mut walk = Vec::new();
    while let Some(i) = left.iter().position(|&e| g.edge(e).touches(at)) {
        let e = left.remove(i);
        at = g.edge(e).other(at);
        walk.push(e);
    }
    if !left.is_empty() {
        return None;
    }
    FilamentPath::from_edges(g, walk).ok()
}

#[test]
fn bundled_fixture_matches_the_generator() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fixture_contrived.gml");
    let file = load_gml(File::open(path).unwrap(), CoordinateMode::Geometric).unwrap();
    let fixture = fixture_contrived();
    assert!(file.graph.approx_eq(&fixture.graph, 0.0));
    assert_eq!(file.partition.unwrap(), fixture.truth);
}

#[test]
fn fixture_truth_is_paths_and_one_loop() {
    let f = fixture_contrived();
    assert_eq!(f.graph.edge_count(), 29);
    assert!(f.graph.is_connected());
    assert!(f.truth.is_overlapping());
    let mut cyclic = 0;
    for (label, edges) in f.truth.filaments() {
        let walk = as_walk(&f.graph, &edges).unwrap_or_else(|| panic!("filament {label}"));
        cyclic += usize::from(walk.is_cyclic());
    }
    assert_eq!(cyclic, 1);
    assert!(round_trip(&f.graph).approx_eq(&f.graph, 0.0));
}

#[test]
fn corpus_covers_the_required_families() {
    let corpus = enumerate_small_instances(7);
    assert_eq!(corpus.len(), SMALL_CORPUS_SIZE);
    assert!(corpus.len() >= 200);
    let star = corpus
        .iter()
        .any(|g| g.edge_count() == 3 && degrees(g) == [1, 1, 1, 3]);
    let square = corpus
        .iter()
        .any(|g| g.edge_count() == 4 && degrees(g) == [2, 2, 2, 2]);
    let theta = corpus.iter().any(|g| {
        degrees(g).iter().filter(|&&d| d == 3).count() == 2 && degrees(g).iter().all(|&d| d >= 2)
    });
    let path = corpus.iter().any(|g| {
        g.edge_count() == 5
            && degrees(g).iter().filter(|&&d| d == 1).count() == 2
            && degrees(g).iter().all(|&d| d <= 2)
    });
    assert!(star && square && theta && path);
    for g in &corpus {
        assert!(g.edge_count() <= 7 && g.is_connected());
        assert!(g.weights().iter().all(|w| [1.0, 2.0, 3.0].contains(w)));
        assert!(round_trip(g).approx_eq(g, 0.0));
    }
    let again = enumerate_small_instances(7);
    assert!(corpus.iter().zip(&again).all(|(a, b)| a.approx_eq(b, 0.0)));
}

#[test]
fn network_is_connected_and_desk_sized() {
    let g = random_filament_network(10, 1).unwrap();
    assert!(g.is_connected());
    assert!((180..=220).contains(&g.edge_count()));
    assert!(g.weights().iter().all(|&w| w > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_cover_respects_overlap_budget(n in 2usize..40, budget in 1usize..12, seed in any::<u64>()) {
        let tree = random_geometric_tree(n, seed).unwrap();
        prop_assert_eq!(tree.edge_count() + 1, tree.node_count());
        prop_assert!(tree.is_connected());
        let cover = random_overlapping_tree_cover(&tree, budget, seed ^ 1).unwrap();
        let overlap: usize = cover.all_labels().iter().map(|l| l.len() - 1).sum();
        prop_assert!(overlap < budget);
        for (_, edges) in cover.filaments() {
            let walk = as_walk(&tree, &edges);
            prop_assert!(walk.is_some_and(|w| !w.is_cyclic()));
        }
        prop_assert_eq!(cover, random_overlapping_tree_cover(&tree, budget, seed ^ 1).unwrap());
    }
}
