//! Directed-graph centrality on binarized adjacency estimates: out-degree,
//! out-closeness (raw and reachability-normalized), shortest-path
//! betweenness and eigenvector centrality.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Boolean adjacency with `a[i][j]` meaning an edge `i → j`. Self-loops are
/// never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DirectedGraph {
    n: usize,
    adj: Vec<bool>,
}

impl DirectedGraph {
    pub fn empty(n: usize) -> Self {
        DirectedGraph {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = DirectedGraph::empty(n);
        for i in 0..n {
            for j in 0..n {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Builds a graph from `(from, to)` pairs; self-loops are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = DirectedGraph::empty(n);
        for &(i, j) in edges {
            g.set_edge(i, j, true);
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    /// Sets an edge; requests for `i == j` are ignored.
    pub fn set_edge(&mut self, i: usize, j: usize, on: bool) {
        if i != j {
            self.adj[i * self.n + j] = on;
        }
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&a| a).count()
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.has_edge(i, j))
    }

    /// 0/1 adjacency as a dense matrix.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut g = DirectedGraph::empty(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.has_edge(i, j) {
                    g.set_edge(perm[i], perm[j], true);
                }
            }
        }
        g
    }
}

/// Edge `i → j` iff `B_ij > threshold` and `i ≠ j`.
pub fn binarize(b: &Matrix, threshold: f64) -> DirectedGraph {
    let n = b.nrows();
    let mut g = DirectedGraph::empty(n);
    for i in 0..n {
        for j in 0..n {
            if b[(i, j)] > threshold {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

/// Threshold halfway between the two cluster centres of a 1-D two-means fit
/// to the off-diagonal entries. Falls back to the entry mean when the
/// entries do not separate.
pub fn two_mode_threshold(b: &Matrix) -> f64 {
    let n = b.nrows();
    let mut xs: Vec<f64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                xs.push(b[(i, j)]);
            }
        }
    }
    if xs.is_empty() {
        return 0.5;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let total: f64 = xs.iter().sum();
    let mean = total / xs.len() as f64;
    // exact 1-D two-means: scan every split of the sorted values
    let mut best = (f64::INFINITY, mean);
    let mut left_sum = 0.0;
    let mut left_sq = 0.0;
    let total_sq: f64 = xs.iter().map(|x| x * x).sum();
    for k in 1..xs.len() {
        left_sum += xs[k - 1];
        left_sq += xs[k - 1] * xs[k - 1];
        if xs[k] == xs[k - 1] {
            continue;
        }
        let (nl, nr) = (k as f64, (xs.len() - k) as f64);
        let right_sum = total - left_sum;
        let sse = (left_sq - left_sum * left_sum / nl) + (total_sq - left_sq - right_sum * right_sum / nr);
        if sse < best.0 {
            best = (sse, 0.5 * (left_sum / nl + right_sum / nr));
        }
    }
    best.1
}

#[derive(Clone, Debug, PartialEq)]
pub struct CentralityScores {
    /// Counts, stored as reals so averaged scores share the type.
    pub out_degree: Vec<f64>,
    pub out_closeness: Vec<f64>,
    pub out_closeness_norm: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub eigencentrality: Vec<f64>,
    /// Power iteration met its tolerance (for averages: on every graph).
    pub eigen_converged: bool,
}

/// The four headline measures, in reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    OutDegree,
    OutCloseness,
    Betweenness,
    Eigencentrality,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::OutDegree,
        Measure::OutCloseness,
        Measure::Betweenness,
        Measure::Eigencentrality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::OutDegree => "out_degree",
            Measure::OutCloseness => "out_closeness",
            Measure::Betweenness => "betweenness",
            Measure::Eigencentrality => "eigencentrality",
        }
    }
}

impl CentralityScores {
    pub fn compute(g: &DirectedGraph) -> Self {
        let (raw, norm) = out_closeness(g);
        let eig = eigencentrality(g);
        CentralityScores {
            out_degree: out_degree(g).into_iter().map(|d| d as f64).collect(),
            out_closeness: raw,
            out_closeness_norm: norm,
            betweenness: betweenness(g),
            eigencentrality: eig.scores,
            eigen_converged: eig.converged,
        }
    }

    pub fn len(&self) -> usize {
        self.out_degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out_degree.is_empty()
    }

    /// Per-node vector of a headline measure. Out-closeness reports the
    /// normalized variant.
    pub fn measure(&self, m: Measure) -> &[f64] {
        match m {
            Measure::OutDegree => &self.out_degree,
            Measure::OutCloseness => &self.out_closeness_norm,
            Measure::Betweenness => &self.betweenness,
            Measure::Eigencentrality => &self.eigencentrality,
        }
    }

    /// Node average of a headline measure.
    pub fn node_mean(&self, m: Measure) -> f64 {
        let v = self.measure(m);
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    }

    /// Mean absolute error against `truth`, averaged over nodes.
    pub fn mae(&self, truth: &CentralityScores, m: Measure) -> f64 {
        let (a, b) = (self.measure(m), truth.measure(m));
        if a.is_empty() {
            return 0.0;
        }
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
    }
}

/// `d_i = Σ_{j≠i} a_ij`.
pub fn out_degree(g: &DirectedGraph) -> Vec<usize> {
    (0..g.n).map(|i| g.successors(i).count()).collect()
}

/// Hop distances from `src`; `None` for unreachable nodes.
pub fn bfs_distances(g: &DirectedGraph, src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes have distances");
        for v in g.successors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Out-closeness, raw and normalized.
///
/// Raw: inverse of the summed hop distance to reachable nodes (0 when none
/// is reachable). Normalized: raw × `R_i / (n − 1)` with `R_i` the number of
/// reachable nodes.
pub fn out_closeness(g: &DirectedGraph) -> (Vec<f64>, Vec<f64>) {
    let n = g.n;
    let mut raw = vec![0.0; n];
    let mut norm = vec![0.0; n];
    for i in 0..n {
        let dist = bfs_distances(g, i);
        let (mut total, mut reach) = (0usize, 0usize);
        for (j, d) in dist.iter().enumerate() {
            if let (true, Some(d)) = (j != i, d) {
                total += d;
                reach += 1;
            }
        }
        if total > 0 {
            raw[i] = 1.0 / total as f64;
            norm[i] = raw[i] * reach as f64 / (n - 1) as f64;
        }
    }
    (raw, norm)
}

/// Shortest-path betweenness normalized by `(n − 1)(n − 2)`, via Brandes
/// dependency accumulation over BFS DAGs. Graphs with fewer than three
/// nodes score zero everywhere.
pub fn betweenness(g: &DirectedGraph) -> Vec<f64> {
    let n = g.n;
    let mut cb = vec![0.0; n];
    if n < 3 {
        return cb;
    }
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = usize::MAX);
        delta.iter_mut().for_each(|x| *x = 0.0);
        preds.iter_mut().for_each(Vec::clear);
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for w in g.successors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    let denom = ((n - 1) * (n - 2)) as f64;
    cb.iter_mut().for_each(|x| *x /= denom);
    cb
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    /// Absolute values of the dominant right eigenvector, L1-normalized.
    pub scores: Vec<f64>,
    /// Rayleigh-type estimate `‖A x‖₁ / ‖x‖₁` at the last iterate.
    pub eigenvalue: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub const EIGEN_TOL: f64 = 1e-10;
pub const EIGEN_MAX_ITER: usize = 10_000;

/// Dominant right eigenvector `x_i = (1/λ) Σ_j a_ij x_j` by power iteration
/// from the uniform vector. A nilpotent adjacency (the iterate vanishes)
/// yields a zero vector flagged as not converged.
pub fn eigencentrality(g: &DirectedGraph) -> EigenResult {
    let n = g.n;
    if n == 0 {
        return EigenResult {
            scores: Vec::new(),
            eigenvalue: 0.0,
            converged: false,
            iterations: 0,
        };
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for iter in 1..=EIGEN_MAX_ITER {
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = g.successors(i).map(|j| x[j]).sum();
        }
        let norm: f64 = next.iter().map(|v| v.abs()).sum();
        if norm == 0.0 {
            return EigenResult {
                scores: vec![0.0; n],
                eigenvalue: 0.0,
                converged: false,
                iterations: iter,
            };
        }
        next.iter_mut().for_each(|v| *v = v.abs() / norm);
        let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        core::mem::swap(&mut x, &mut next);
        if diff < EIGEN_TOL {
            let lambda = (0..n).map(|i| g.successors(i).map(|j| x[j]).sum::<f64>()).sum::<f64>();
            return EigenResult {
                scores: x,
                eigenvalue: lambda,
                converged: true,
                iterations: iter,
            };
        }
    }
    let lambda = (0..n).map(|i| g.successors(i).map(|j| x[j]).sum::<f64>()).sum::<f64>();
    EigenResult {
        scores: x,
        eigenvalue: lambda,
        converged: false,
        iterations: EIGEN_MAX_ITER,
    }
}

/// Centrality computed per graph, then averaged node-wise.
pub fn average_centrality(graphs: &[DirectedGraph]) -> Result<CentralityScores> {
    let first = graphs.first().ok_or(Error::EmptyInput("graph list"))?;
    let n = first.node_count();
    if graphs.iter().any(|g| g.node_count() != n) {
        return Err(Error::domain("graphs in an average must share a node count"));
    }
    let scores: Vec<CentralityScores> = graphs.iter().map(CentralityScores::compute).collect();
    average_scores(&scores)
}

/// Node-wise mean of precomputed score sets.
pub fn average_scores(scores: &[CentralityScores]) -> Result<CentralityScores> {
    let first = scores.first().ok_or(Error::EmptyInput("score list"))?;
    let n = first.len();
    if scores.iter().any(|s| s.len() != n) {
        return Err(Error::domain("score sets in an average must share a node count"));
    }
    // running mean: a constant sequence averages to itself exactly
    let mean_of = |f: fn(&CentralityScores) -> &Vec<f64>| -> Vec<f64> {
        (0..n)
            .map(|i| {
                scores
                    .iter()
                    .enumerate()
                    .fold(0.0, |m, (k, s)| m + (f(s)[i] - m) / (k + 1) as f64)
            })
            .collect()
    };
    Ok(CentralityScores {
        out_degree: mean_of(|s| &s.out_degree),
        out_closeness: mean_of(|s| &s.out_closeness),
        out_closeness_norm: mean_of(|s| &s.out_closeness_norm),
        betweenness: mean_of(|s| &s.betweenness),
        eigencentrality: mean_of(|s| &s.eigencentrality),
        eigen_converged: scores.iter().all(|s| s.eigen_converged),
    })
}

/// Centrality of each binarized matrix in `draws`.
pub fn per_draw_centrality<'a>(draws: impl IntoIterator<Item = &'a Matrix>, threshold: f64) -> Vec<CentralityScores> {
    draws
        .into_iter()
        .map(|b| CentralityScores::compute(&binarize(b, threshold)))
        .collect()
}

/// Node-averaged value of `m` for each score set, in order.
pub fn node_mean_path(scores: &[CentralityScores], m: Measure) -> Vec<f64> {
    scores.iter().map(|s| s.node_mean(m)).collect()
}
