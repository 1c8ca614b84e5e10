//! Constant-difference check of every full conditional against the
//! oracle joint.

use super::*;
use mtnet_core::gibbs::*;
use mtnet_core::Matrix;
use mtnet_oracles::{ln_joint_augmented, ln_joint_collapsed, Mat};

pub const EVALS: usize = 10;
pub const TOL: f64 = 1e-8;

pub struct Case {
    pub obs: ObservationSet,
    pub ys: Vec<Mat>,
    pub hyper: Hyperparameters,
    pub state: ModelState,
}

pub fn case(seed: u64, mode: BetaMode) -> Case {
    let (n, t) = (2, 3);
    let mut r = rng(seed);
    let hyper = random_hyper(n, mode, &mut r);
    let state = random_state(n, t, &hyper, &mut r);
    let ys: Vec<Matrix> = (0..t)
        .map(|_| {
            let mut y = gaussian(n, &mut r);
            y.add_scaled(1.0, &state.b);
            y
        })
        .collect();
    Case {
        ys: ys.iter().map(na).collect(),
        obs: ObservationSet::new(n, ys).unwrap(),
        hyper,
        state,
    }
}

pub fn spread(pairs: &[(f64, f64)]) -> f64 {
    let d: Vec<f64> = pairs.iter().map(|(joint, cond)| joint - cond).collect();
    assert!(d.iter().all(|v| v.is_finite()), "{d:?}");
    let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Runs the check for every block of one case, returning `(block, spread)`.
pub fn block_spreads(c: &Case, seed: u64) -> Vec<(&'static str, f64)> {
    let oh = oracle_hyper(&c.hyper);
    let aug = |s: &ModelState| ln_joint_augmented(&c.ys, &oracle_state(s), &oh);
    let mut r = rng(seed ^ 0xb10c);
    let mut out = Vec::new();

    let nu = nu_conditional(&c.state, &c.obs, &c.hyper).unwrap();
    let pairs: Vec<_> = (0..EVALS)
        .map(|k| {
            let mut s = c.state.clone();
            s.nu = 1.2 + 0.9 * k as f64;
            (ln_joint_collapsed(&c.ys, &oracle_state(&s), &oh), nu.ln_density(s.nu))
        })
        .collect();
    out.push(("nu", spread(&pairs)));

    for t in 0..c.obs.len() {
        let dist = w_conditional(&c.state, &c.obs, t).unwrap();
        let pairs: Vec<_> = (0..EVALS)
            .map(|_| {
                let mut s = c.state.clone();
                s.w[t] = dist.sample(&mut r);
                (aug(&s), dist.ln_pdf(&s.w[t]).unwrap())
            })
            .collect();
        out.push(("w", spread(&pairs)));
    }

    let dist = b_conditional(&c.state, &c.obs, &c.hyper).unwrap();
    let pairs: Vec<_> = (0..EVALS)
        .map(|_| {
            let mut s = c.state.clone();
            s.b = dist.sample(&mut r);
            (aug(&s), dist.ln_pdf(&s.b).unwrap())
        })
        .collect();
    out.push(("b", spread(&pairs)));

    let dist = sigma1_conditional(&c.state, &c.hyper).unwrap();
    let pairs: Vec<_> = (0..EVALS)
        .map(|_| {
            let mut s = c.state.clone();
            s.sigma1 = dist.sample(&mut r);
            (aug(&s), dist.ln_pdf(&s.sigma1).unwrap())
        })
        .collect();
    out.push(("sigma1", spread(&pairs)));

    let dist = sigma2_conditional(&c.state, &c.obs, &c.hyper).unwrap();
    let pairs: Vec<_> = (0..EVALS)
        .map(|_| {
            let mut s = c.state.clone();
            s.sigma2 = dist.sample(&mut r);
            (aug(&s), dist.ln_pdf(&s.sigma2).unwrap())
        })
        .collect();
    out.push(("sigma2", spread(&pairs)));

    let dist = gamma_conditional(&c.state, &c.hyper).unwrap();
    let pairs: Vec<_> = (0..EVALS)
        .map(|_| {
            let mut s = c.state.clone();
            s.gamma = dist.sample(&mut r).unwrap();
            (aug(&s), dist.ln_pdf(s.gamma))
        })
        .collect();
    out.push(("gamma", spread(&pairs)));

    match beta_conditional(&c.state, &c.hyper).unwrap() {
        Some(dist) => {
            let pairs: Vec<_> = (0..EVALS)
                .map(|_| {
                    let mut s = c.state.clone();
                    s.beta = dist.sample(&mut r).unwrap();
                    (aug(&s), dist.ln_pdf(s.beta))
                })
                .collect();
            out.push(("beta", spread(&pairs)));
        }
        None => {
            let BetaMode::Fixed(b) = c.hyper.beta_mode else { panic!("sampled mode without conditional") };
            let drawn = update_beta(&c.state, &c.hyper, &mut r).unwrap();
            out.push(("beta", (drawn - b).abs()));
        }
    }
    out
}

