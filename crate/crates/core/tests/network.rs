mod common;

use common::graphs::*;
use mtnet_core::network::*;
use mtnet_oracles as oracle;
use proptest::prelude::*;

#[test]
fn measures_match_brute_force_on_small_digraphs() {
    let (worst, eigen_checked) = brute_force_sweep(200, 61);
    for (k, w) in worst[..4].iter().enumerate() {
        assert!(*w <= 1e-12, "measure {k}: {w:e}");
    }
    assert!(worst[4] < 1e-8, "eigencentrality {:e}", worst[4]);
    assert!(eigen_checked >= 40, "only {eigen_checked} graphs had a reference eigenvector");
}

#[test]
fn acyclic_graph_has_zero_eigencentrality() {
    let g = DirectedGraph::from_edges(4, &[(0, 1), (1, 2), (0, 3), (3, 2)]);
    let e = eigencentrality(&g);
    assert!(!e.converged && e.scores == vec![0.0; 4]);
}

#[test]
fn complete_graph_is_uniform() {
    let g = DirectedGraph::complete(6);
    let s = CentralityScores::compute(&g);
    assert!(s.out_degree.iter().all(|&d| d == 5.0));
    assert!(s.out_closeness_norm.iter().all(|&c| (c - 0.2).abs() < 1e-15));
    assert!(s.betweenness.iter().all(|&b| b == 0.0));
    assert!(s.eigencentrality.iter().all(|&x| (x - 1.0 / 6.0).abs() < 1e-12));
}

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<bool>)> {
    (2usize..8).prop_flat_map(|n| (Just(n), prop::collection::vec(any::<bool>(), n * n)))
}

fn build(n: usize, bits: &[bool]) -> DirectedGraph {
    let mut g = DirectedGraph::empty(n);
    for i in 0..n {
        for j in 0..n {
            g.set_edge(i, j, bits[i * n + j]);
        }
    }
    g
}

proptest! {
    #[test]
    fn permuting_nodes_permutes_scores((n, bits) in graph_strategy(), shift in 0usize..8, flip in any::<bool>()) {
        let g = build(n, &bits);
        let mut perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        if flip {
            perm.reverse();
        }
        let h = g.permuted(&perm);
        let (a, b) = (CentralityScores::compute(&g), CentralityScores::compute(&h));
        // node i of g is node perm[i] of h
        for (i, &p) in perm.iter().enumerate() {
            prop_assert_eq!(a.out_degree[i], b.out_degree[p]);
            prop_assert!((a.out_closeness_norm[i] - b.out_closeness_norm[p]).abs() < 1e-12);
            prop_assert!((a.betweenness[i] - b.betweenness[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn betweenness_matches_path_enumeration((n, bits) in graph_strategy()) {
        let g = build(n, &bits);
        let want = oracle::betweenness(&adjacency(&g));
        prop_assert!(max_diff(&betweenness(&g), &want) <= 1e-12);
    }

    #[test]
    fn scores_stay_in_range((n, bits) in graph_strategy()) {
        let s = CentralityScores::compute(&build(n, &bits));
        let nf = n as f64;
        for i in 0..n {
            prop_assert!(s.out_degree[i] <= nf - 1.0);
            prop_assert!((0.0..=1.0).contains(&s.out_closeness_norm[i]));
            prop_assert!((0.0..=1.0).contains(&s.betweenness[i]));
            prop_assert!(s.eigencentrality[i] >= 0.0);
        }
    }

    #[test]
    fn binarize_ignores_diagonal_and_threshold_is_strict(vals in prop::collection::vec(-2.0f64..2.0, 16), tau in -1.0f64..1.0) {
        let m = mtnet_core::Matrix::from_col_major(4, 4, vals).unwrap();
        let g = binarize(&m, tau);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(g.has_edge(i, j), i != j && m[(i, j)] > tau);
            }
        }
    }
}

#[test]
fn two_means_threshold_separates_clusters() {
    let mut m = mtnet_core::Matrix::zeros(4, 4);
    m[(0, 1)] = 1.0;
    m[(1, 2)] = 0.9;
    m[(2, 3)] = 1.1;
    m[(3, 0)] = 0.05;
    let tau = two_mode_threshold(&m);
    assert!(tau > 0.05 && tau < 0.9, "{tau}");
    assert_eq!(binarize(&m, tau).edge_count(), 3);
}
