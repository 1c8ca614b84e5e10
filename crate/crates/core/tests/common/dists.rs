use mtnet_core::dists::*;
use mtnet_core::Matrix;
use mtnet_oracles as oracle;

/// `∫ N(x; 0, w σ2) IMG(w; ν/2, 2, σ1) dw` at `n = 1`.
pub fn compound_density(x: f64, nu: f64, s1: f64, s2: f64) -> f64 {
    let w_dist = InvMatrixGamma::new(nu / 2.0, 2.0, &Matrix::from_diag(&[s1])).unwrap();
    oracle::integrate_positive(
        |w| (ln_normal_pdf(x, 0.0, w * s2) + w_dist.ln_pdf(&Matrix::from_diag(&[w])).unwrap()).exp(),
        -40.0,
        40.0,
        4000,
    )
}

pub fn entry_mean_se(draws: &[Matrix], i: usize, j: usize) -> (f64, f64) {
    let k = draws.len() as f64;
    let m = draws.iter().map(|d| d[(i, j)]).sum::<f64>() / k;
    let v = draws.iter().map(|d| (d[(i, j)] - m).powi(2)).sum::<f64>() / (k - 1.0);
    (m, (v / k).sqrt())
}

