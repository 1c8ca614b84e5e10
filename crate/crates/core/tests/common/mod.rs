#![allow(dead_code)]

use mtnet_core::gibbs::{BetaMode, Hyperparameters, ModelState};
use mtnet_core::rng::{substream, ChainRng};
use mtnet_core::Matrix;
use mtnet_oracles::{BetaPrior, Hyper, Mat, State};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn na(m: &Matrix) -> Mat {
    assert!(m.is_square());
    mtnet_oracles::from_col_major(m.nrows(), m.as_slice())
}

pub fn rng(seed: u64) -> ChainRng {
    substream(seed, &[0x7e57])
}

pub fn gaussian(n: usize, rng: &mut ChainRng) -> Matrix {
    Matrix::from_fn(n, n, |_, _| StandardNormal.sample(rng))
}

/// `A Aᵀ / n + c I` with a random `c ∈ [0.2, 1.2)`.
pub fn random_spd(n: usize, rng: &mut ChainRng) -> Matrix {
    let a = gaussian(n, rng);
    let mut s = a.matmul(&a.transpose()).scale(1.0 / n as f64).symmetrize();
    s.add_diag(0.2 + rng.random::<f64>());
    s
}

pub fn random_hyper(n: usize, mode: BetaMode, rng: &mut ChainRng) -> Hyperparameters {
    let mut h = Hyperparameters::default_for(n);
    h.omega1 = random_spd(n, rng);
    h.omega2 = random_spd(n, rng);
    h.phi1 = random_spd(n, rng);
    h.phi2 = random_spd(n, rng);
    h.delta1 = n as f64 + rng.random::<f64>();
    h.delta2 = n as f64 + 0.5 + rng.random::<f64>();
    h.a_gamma = 1.5;
    h.b_gamma = 0.8;
    h.a_nu = 2.5;
    h.b_nu = 4.0;
    h.beta_mode = mode;
    h
}

pub fn random_state(n: usize, t: usize, hyper: &Hyperparameters, rng: &mut ChainRng) -> ModelState {
    ModelState {
        b: gaussian(n, rng),
        sigma1: random_spd(n, rng),
        sigma2: random_spd(n, rng),
        gamma: 0.5 + rng.random::<f64>(),
        nu: 1.5 + 4.0 * rng.random::<f64>(),
        beta: match hyper.beta_mode {
            BetaMode::Fixed(b) => b,
            _ => 0.5 + 2.0 * rng.random::<f64>(),
        },
        w: (0..t).map(|_| random_spd(n, rng)).collect(),
    }
}

pub fn oracle_hyper(h: &Hyperparameters) -> Hyper {
    Hyper {
        omega1: na(&h.omega1),
        omega2: na(&h.omega2),
        phi1: na(&h.phi1),
        phi2: na(&h.phi2),
        delta1: h.delta1,
        delta2: h.delta2,
        a_gamma: h.a_gamma,
        b_gamma: h.b_gamma,
        a_nu: h.a_nu,
        b_nu: h.b_nu,
        beta: match h.beta_mode {
            BetaMode::Fixed(_) => BetaPrior::Fixed,
            BetaMode::Jeffreys => BetaPrior::Jeffreys,
            BetaMode::InverseGamma { shape, scale } => BetaPrior::InverseGamma(shape, scale),
        },
    }
}

pub fn oracle_state(s: &ModelState) -> State {
    State {
        b: na(&s.b),
        sigma1: na(&s.sigma1),
        sigma2: na(&s.sigma2),
        gamma: s.gamma,
        nu: s.nu,
        beta: s.beta,
        w: s.w.iter().map(na).collect(),
    }
}

pub fn all_modes() -> [BetaMode; 3] {
    [BetaMode::Fixed(1.3), BetaMode::Jeffreys, BetaMode::InverseGamma { shape: 3.0, scale: 0.7 }]
}

pub mod conditionals;
pub mod dists;
pub mod graphs;
pub mod jeffreys;
pub mod granger;
