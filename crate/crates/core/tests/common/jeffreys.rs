//! Monte Carlo Fisher information of β from the prior terms of the joint.

use super::*;
use mtnet_core::dists::{InvMatrixGamma, MatrixGamma, ScalarDist};
use mtnet_oracles::ln_prior;

pub struct FisherEstimate {
    pub mean: f64,
    pub se: f64,
    pub expected: f64,
}

/// Draws `(γ, Σ1, Σ2)` from the prior at fixed β and averages the negated
/// second derivative in β of the oracle log prior (central differences).
pub fn fisher_information(n: usize, delta1: f64, delta2: f64, beta: f64, draws: usize, seed: u64) -> FisherEstimate {
    let mut r = rng(seed);
    let mut hyper = random_hyper(n, BetaMode::Fixed(beta), &mut r);
    hyper.delta1 = delta1;
    hyper.delta2 = delta2;
    hyper.a_gamma = 3.0;
    hyper.b_gamma = 0.5;
    let oh = oracle_hyper(&hyper);
    let gamma_prior = ScalarDist::Gamma { shape: hyper.a_gamma, scale: hyper.b_gamma };
    let h = 1e-3 * beta;
    let mut state = oracle_state(&random_state(n, 0, &hyper, &mut r));
    state.b.fill(0.0);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..draws {
        let gamma = gamma_prior.sample(&mut r).unwrap();
        let phi1_inv = spd_inverse(&hyper.phi1).scale(1.0 / gamma);
        let s1 = MatrixGamma::new(delta1, beta, &phi1_inv).unwrap().sample(&mut r);
        let s2 = InvMatrixGamma::new(delta2, beta, &hyper.phi2.scale(gamma)).unwrap().sample(&mut r);
        state.gamma = gamma;
        state.sigma1 = na(&s1);
        state.sigma2 = na(&s2);
        let mut at = |b: f64| {
            state.beta = b;
            ln_prior(&state, &oh)
        };
        let info = -(at(beta + h) - 2.0 * at(beta) + at(beta - h)) / (h * h);
        sum += info;
        sum2 += info * info;
    }
    let k = draws as f64;
    let mean = sum / k;
    let var = (sum2 / k - mean * mean) * k / (k - 1.0);
    FisherEstimate {
        mean,
        se: (var / k).sqrt(),
        expected: n as f64 * (delta1 + delta2) / (beta * beta),
    }
}

fn spd_inverse(m: &Matrix) -> Matrix {
    mtnet_core::linalg::spd_factor(m).unwrap().inverse()
}
