//! Brute-force comparison of the centrality measures.

use mtnet_core::network::*;
use mtnet_oracles as oracle;
use rand::Rng;

pub fn adjacency(g: &DirectedGraph) -> oracle::Adj {
    let n = g.node_count();
    (0..n).map(|i| (0..n).map(|j| g.has_edge(i, j)).collect()).collect()
}

pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> DirectedGraph {
    let mut g = DirectedGraph::empty(n);
    for i in 0..n {
        for j in 0..n {
            g.set_edge(i, j, i != j && rng.random::<f64>() < p);
        }
    }
    g
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Worst deviation of each measure from the brute-force references over
/// `count` random digraphs with `n ≤ 5`, and how many had a reference
/// eigenvector.
pub fn brute_force_sweep(count: usize, seed: u64) -> ([f64; 5], usize) {
    let mut r = super::rng(seed);
    let mut worst = [0.0f64; 5];
    let mut eigen_checked = 0;
    for k in 0..count {
        let n = 1 + k % 5;
        let p = 0.15 + 0.7 * r.random::<f64>();
        let g = random_graph(n, p, &mut r);
        let adj = adjacency(&g);
        let s = CentralityScores::compute(&g);
        let (raw, norm) = oracle::out_closeness(&adj);
        worst[0] = worst[0].max(max_diff(&s.out_degree, &oracle::out_degree(&adj)));
        worst[1] = worst[1].max(max_diff(&s.out_closeness, &raw));
        worst[2] = worst[2].max(max_diff(&s.out_closeness_norm, &norm));
        worst[3] = worst[3].max(max_diff(&s.betweenness, &oracle::betweenness(&adj)));
        if let Some((_, v)) = oracle::dominant_eigenvector(&adj) {
            assert!(s.eigen_converged, "power iteration stalled on {adj:?}");
            worst[4] = worst[4].max(max_diff(&s.eigencentrality, &v));
            eigen_checked += 1;
        } else if oracle::is_acyclic(&adj) {
            assert!(s.eigencentrality.iter().all(|&x| x == 0.0) && !s.eigen_converged);
        }
    }
    (worst, eigen_checked)
}

