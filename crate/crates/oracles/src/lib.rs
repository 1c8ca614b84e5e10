//! Reference implementations for tests.
//!
//! Nothing here shares code with `mtnet-core`: linear algebra goes through
//! nalgebra, log-gamma through statrs, and graph measures through brute
//! force. Matrices cross the boundary as column-major slices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

pub type Mat = DMatrix<f64>;

pub fn from_col_major(n: usize, data: &[f64]) -> Mat {
    DMatrix::from_column_slice(n, n, data)
}

fn ln_det_spd(m: &Mat) -> f64 {
    let c = m.clone().cholesky().expect("oracle input must be SPD");
    2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

fn inv_spd(m: &Mat) -> Mat {
    m.clone().cholesky().expect("oracle input must be SPD").inverse()
}

/// `ln Γ_p(z)` from its product definition.
pub fn ln_mv_gamma(p: usize, z: f64) -> f64 {
    let pf = p as f64;
    pf * (pf - 1.0) / 4.0 * PI.ln() + (1..=p).map(|i| ln_gamma(z - (i as f64 - 1.0) / 2.0)).sum::<f64>()
}

/// Wishart `W_n(κ, V)` log-density (mean `κV`).
pub fn wishart_ln_pdf(kappa: f64, v: &Mat, x: &Mat) -> f64 {
    let n = v.nrows() as f64;
    -(kappa * n / 2.0) * 2f64.ln() - kappa / 2.0 * ln_det_spd(v) - ln_mv_gamma(v.nrows(), kappa / 2.0)
        + (kappa - n - 1.0) / 2.0 * ln_det_spd(x)
        - 0.5 * (inv_spd(v) * x).trace()
}

/// Inverse-Wishart `IW_n(κ, Ψ)` log-density (mean `Ψ/(κ−n−1)`).
pub fn inv_wishart_ln_pdf(kappa: f64, psi: &Mat, x: &Mat) -> f64 {
    let n = psi.nrows() as f64;
    kappa / 2.0 * ln_det_spd(psi) - (kappa * n / 2.0) * 2f64.ln() - ln_mv_gamma(psi.nrows(), kappa / 2.0)
        - (kappa + n + 1.0) / 2.0 * ln_det_spd(x)
        - 0.5 * (psi * inv_spd(x)).trace()
}

/// Multivariate normal log-density.
pub fn mvn_ln_pdf(mean: &DVector<f64>, cov: &Mat, x: &DVector<f64>) -> f64 {
    let k = mean.len() as f64;
    let d = x - mean;
    let c = cov.clone().cholesky().expect("covariance must be SPD");
    let q = d.dot(&c.solve(&d));
    -0.5 * (k * (2.0 * PI).ln() + ln_det_spd(cov) + q)
}

fn vec_of(m: &Mat) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Matrix normal `N(M, U, V)` through its vectorized form
/// `vec X ~ N(vec M, V ⊗ U)`.
pub fn matrix_normal_ln_pdf(mean: &Mat, u: &Mat, v: &Mat, x: &Mat) -> f64 {
    mvn_ln_pdf(&vec_of(mean), &v.kronecker(u), &vec_of(x))
}

/// Matrix t density written out from its definition.
pub fn matrix_t_ln_pdf(nu: f64, mean: &Mat, s1: &Mat, s2: &Mat, x: &Mat) -> f64 {
    let n = mean.nrows();
    let nf = n as f64;
    let d = x - mean;
    let inner = Mat::identity(n, n) + inv_spd(s1) * &d * inv_spd(s2) * d.transpose();
    let ln_det_inner = inner.determinant().ln();
    ln_mv_gamma(n, (nu + 2.0 * nf - 1.0) / 2.0) - ln_mv_gamma(n, (nu + nf - 1.0) / 2.0)
        - nf * nf / 2.0 * PI.ln()
        - nf / 2.0 * (ln_det_spd(s1) + ln_det_spd(s2))
        - (nu + 2.0 * nf - 1.0) / 2.0 * ln_det_inner
}

/// Location-scale Student t.
pub fn student_t_ln_pdf(x: f64, nu: f64, loc: f64, scale: f64) -> f64 {
    let z = (x - loc) / scale;
    ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * PI).ln() - scale.ln()
        - (nu + 1.0) / 2.0 * (1.0 + z * z / nu).ln()
}

pub fn gamma_ln_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()
}

/// Inverse gamma with shape `a` and rate `r`.
pub fn inv_gamma_ln_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - rate / x
}

// ------------------------------------------------------------------ model

/// Prior on β in the joint.
#[derive(Clone, Copy, Debug)]
pub enum BetaPrior {
    Fixed,
    Jeffreys,
    /// Shape `a`, scale `b` with density `∝ β^{-(a+1)} e^{-1/(bβ)}`.
    InverseGamma(f64, f64),
}

#[derive(Clone, Debug)]
pub struct Hyper {
    pub omega1: Mat,
    pub omega2: Mat,
    pub phi1: Mat,
    pub phi2: Mat,
    pub delta1: f64,
    pub delta2: f64,
    pub a_gamma: f64,
    pub b_gamma: f64,
    pub a_nu: f64,
    pub b_nu: f64,
    pub beta: BetaPrior,
}

#[derive(Clone, Debug)]
pub struct State {
    pub b: Mat,
    pub sigma1: Mat,
    pub sigma2: Mat,
    pub gamma: f64,
    pub nu: f64,
    pub beta: f64,
    pub w: Vec<Mat>,
}

/// Log prior of everything except the `W_t`, written with Wishart /
/// inverse-Wishart references: `Σ1 | γ, β ~ W(2δ1, (β/2)(γΦ1)⁻¹)` and
/// `Σ2 | γ, β ~ IW(2δ2, (2/β)γΦ2)`.
pub fn ln_prior(s: &State, h: &Hyper) -> f64 {
    let n = s.b.nrows();
    let lp_b = matrix_normal_ln_pdf(&Mat::zeros(n, n), &h.omega1, &h.omega2, &s.b);
    let lp_nu = if s.nu > 1.0 { gamma_ln_pdf(s.nu, h.a_nu, h.b_nu) } else { f64::NEG_INFINITY };
    let lp_s1 = wishart_ln_pdf(2.0 * h.delta1, &(inv_spd(&h.phi1) * (s.beta / 2.0 / s.gamma)), &s.sigma1);
    let lp_s2 = inv_wishart_ln_pdf(2.0 * h.delta2, &(&h.phi2 * (2.0 / s.beta * s.gamma)), &s.sigma2);
    let lp_g = gamma_ln_pdf(s.gamma, h.a_gamma, h.b_gamma);
    let lp_beta = match h.beta {
        BetaPrior::Fixed => 0.0,
        BetaPrior::Jeffreys => -s.beta.ln(),
        BetaPrior::InverseGamma(a, b) => inv_gamma_ln_pdf(s.beta, a, 1.0 / b),
    };
    lp_b + lp_nu + lp_s1 + lp_s2 + lp_g + lp_beta
}

/// Augmented log joint: prior, `W_t ~ IW(ν+n−1, Σ1)` and
/// `vec Y_t | · ~ N(vec B, Σ2 ⊗ W_t)`.
pub fn ln_joint_augmented(ys: &[Mat], s: &State, h: &Hyper) -> f64 {
    let n = s.b.nrows() as f64;
    let mut total = ln_prior(s, h);
    for (y, w) in ys.iter().zip(&s.w) {
        total += inv_wishart_ln_pdf(s.nu + n - 1.0, &s.sigma1, w);
        total += matrix_normal_ln_pdf(&s.b, w, &s.sigma2, y);
    }
    total
}

/// Log joint with the `W_t` integrated out (matrix-t likelihood).
pub fn ln_joint_collapsed(ys: &[Mat], s: &State, h: &Hyper) -> f64 {
    let mut total = ln_prior(s, h);
    for y in ys {
        total += matrix_t_ln_pdf(s.nu, &s.b, &s.sigma1, &s.sigma2, y);
    }
    total
}

// ------------------------------------------------------------------ graphs

/// Adjacency as `adj[i][j]` (edge `i → j`).
pub type Adj = Vec<Vec<bool>>;

pub fn out_degree(adj: &Adj) -> Vec<f64> {
    adj.iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().filter(|&(j, &a)| a && j != i).count() as f64)
        .collect()
}

/// All-pairs hop distances by Floyd–Warshall (`None` = unreachable).
pub fn distances(adj: &Adj) -> Vec<Vec<Option<usize>>> {
    let n = adj.len();
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for j in 0..n {
            if i != j && adj[i][j] {
                d[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Raw and normalized out-closeness from the distance table.
pub fn out_closeness(adj: &Adj) -> (Vec<f64>, Vec<f64>) {
    let n = adj.len();
    let d = distances(adj);
    let mut raw = vec![0.0; n];
    let mut norm = vec![0.0; n];
    for i in 0..n {
        let reach: Vec<usize> = (0..n).filter(|&j| j != i).filter_map(|j| d[i][j]).collect();
        let total: usize = reach.iter().sum();
        if total > 0 {
            raw[i] = 1.0 / total as f64;
            norm[i] = raw[i] * reach.len() as f64 / (n - 1) as f64;
        }
    }
    (raw, norm)
}

fn simple_paths(adj: &Adj, from: usize, to: usize) -> Vec<Vec<usize>> {
    fn walk(adj: &Adj, path: &mut Vec<usize>, to: usize, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().expect("nonempty");
        if last == to {
            out.push(path.clone());
            return;
        }
        for next in 0..adj.len() {
            if adj[last][next] && next != last && !path.contains(&next) {
                path.push(next);
                walk(adj, path, to, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(adj, &mut vec![from], to, &mut out);
    out
}

/// Betweenness by enumerating every simple path and keeping the shortest.
pub fn betweenness(adj: &Adj) -> Vec<f64> {
    let n = adj.len();
    let mut b = vec![0.0; n];
    if n < 3 {
        return b;
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let paths = simple_paths(adj, i, j);
            let Some(shortest) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let best: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == shortest).collect();
            for (v, slot) in b.iter_mut().enumerate() {
                if v == i || v == j {
                    continue;
                }
                let through = best.iter().filter(|p| p[1..p.len() - 1].contains(&v)).count();
                *slot += through as f64 / best.len() as f64;
            }
        }
    }
    let denom = ((n - 1) * (n - 2)) as f64;
    b.iter().map(|x| x / denom).collect()
}

/// Dominant eigenpair of a nonnegative adjacency from a dense solver, when
/// the dominant eigenvalue is real, positive, simple and strictly larger in
/// modulus than every other eigenvalue. The vector is L1-normalized and
/// nonnegative.
pub fn dominant_eigenvector(adj: &Adj) -> Option<(f64, Vec<f64>)> {
    let n = adj.len();
    let a = Mat::from_fn(n, n, |i, j| if adj[i][j] && i != j { 1.0 } else { 0.0 });
    // the default Schur iteration has no cap and can cycle on defective input
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100_000)?;
    let mut eig: Vec<_> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    let lead = eig[0];
    // a 0/1 matrix with a cycle has spectral radius ≥ 1; nilpotent roots come
    // back from the solver only approximately zero
    if lead.re < 0.5 || lead.im.abs() > 1e-9 {
        return None;
    }
    if eig.len() > 1 && eig[1].norm() > lead.re * (1.0 - 1e-6) {
        return None;
    }
    let lambda = lead.re;
    let shifted = &a - Mat::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t?;
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))?;
    let v: Vec<f64> = v_t.row(k).iter().map(|x| x.abs()).collect();
    let s: f64 = v.iter().sum();
    Some((lambda, v.iter().map(|x| x / s).collect()))
}

/// Whether `adj` is nilpotent (no directed cycle).
pub fn is_acyclic(adj: &Adj) -> bool {
    let n = adj.len();
    let d = distances(adj);
    !(0..n).any(|i| (0..n).any(|j| i != j && adj[i][j] && d[j][i].is_some()))
}

// ------------------------------------------------------------------ regression

/// Residual sum of squares of `y` on the columns of `x` via the normal
/// equations solved by SVD.
pub fn ols_rss(x: &Mat, y: &DVector<f64>) -> f64 {
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    let beta = xtx.svd(true, true).solve(&xty, 1e-12).expect("svd solve");
    (y - x * beta).norm_squared()
}

/// Granger F statistic with an intercept, `p` own lags and `p` lags of `x`;
/// denominator dof `len − 3p − 1`.
pub fn granger_f(x: &[f64], y: &[f64], p: usize) -> f64 {
    let m = y.len() - p;
    let target = DVector::from_iterator(m, y[p..].iter().copied());
    let design = |with_x: bool| {
        let k = if with_x { 2 * p + 1 } else { p + 1 };
        Mat::from_fn(m, k, |row, col| {
            let t = row + p;
            match col {
                0 => 1.0,
                c if c <= p => y[t - c],
                c => x[t - (c - p)],
            }
        })
    };
    let rss_r = ols_rss(&design(false), &target);
    let rss_u = ols_rss(&design(true), &target);
    let d2 = (y.len() - 3 * p - 1) as f64;
    ((rss_r - rss_u) / p as f64) / (rss_u / d2)
}

// ------------------------------------------------------------------ quadrature

/// `∫_a^b f` by composite Gauss–Legendre (5 points) on `panels` panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    total * 0.5 * h
}

/// `∫_0^∞ f` through `w = e^s`, `s ∈ [lo, hi]`.
pub fn integrate_positive(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    gauss_legendre(|s| f(s.exp()) * s.exp(), lo, hi, panels)
}

/// `∫_ℝ f` through `x = sinh(s)`, `s ∈ [−r, r]`.
pub fn integrate_real_line(f: impl Fn(f64) -> f64, r: f64, panels: usize) -> f64 {
    gauss_legendre(|s| f(s.sinh()) * s.cosh(), -r, r, panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wishart_scalar_is_gamma() {
        // W_1(κ, v) is Gamma(κ/2, 2v)
        let v = Mat::from_element(1, 1, 1.5);
        let x = Mat::from_element(1, 1, 2.3);
        let g = gamma_ln_pdf(2.3, 2.5, 3.0);
        assert!((wishart_ln_pdf(5.0, &v, &x) - g).abs() < 1e-12);
    }

    #[test]
    fn quadrature_normalizes() {
        let z = integrate_real_line(|x| student_t_ln_pdf(x, 1.0, 0.0, 1.0).exp(), 40.0, 4000);
        assert!((z - 1.0).abs() < 1e-8, "{z}");
        let z = integrate_positive(|x| inv_gamma_ln_pdf(x, 2.0, 1.0).exp(), -30.0, 40.0, 2000);
        assert!((z - 1.0).abs() < 1e-10, "{z}");
    }

    #[test]
    fn brute_force_examples() {
        let path = vec![vec![false, true, false], vec![false, false, true], vec![false; 3]];
        assert_eq!(betweenness(&path), vec![0.0, 0.5, 0.0]);
        assert_eq!(out_degree(&path), vec![1.0, 1.0, 0.0]);
        let (raw, _) = out_closeness(&path);
        assert!((raw[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!(is_acyclic(&path));
        let k3 = vec![vec![false, true, true], vec![true, false, true], vec![true, true, false]];
        let (lambda, v) = dominant_eigenvector(&k3).unwrap();
        assert!((lambda - 2.0).abs() < 1e-10);
        assert!(v.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-10));
    }
}
