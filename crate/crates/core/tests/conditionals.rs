//! Every full conditional must agree with the model joint up to a constant
//! in its own block. The joints come from `mtnet-oracles`, written against
//! Wishart / inverse-Wishart / matrix-normal references.

mod common;

use common::conditionals::*;
use common::*;
use mtnet_core::gibbs::*;
use mtnet_oracles::ln_joint_augmented;

#[test]
fn every_block_matches_the_joint_up_to_a_constant() {
    for mode in all_modes() {
        for seed in 1..=3 {
            let c = case(seed, mode);
            for (block, s) in block_spreads(&c, seed) {
                assert!(s < TOL, "{} seed {seed} block {block}: spread {s:e}", mode.label());
            }
        }
    }
}

#[test]
fn a_perturbed_conditional_is_detected() {
    // shifting the γ shape by one must break the constant-difference check
    let c = case(4, BetaMode::Jeffreys);
    let oh = oracle_hyper(&c.hyper);
    let good = gamma_conditional(&c.state, &c.hyper).unwrap();
    let mut h = c.hyper.clone();
    h.a_gamma += 1.0;
    let bad = gamma_conditional(&c.state, &h).unwrap();
    let pairs = |d: &mtnet_core::dists::ScalarDist| -> Vec<(f64, f64)> {
        (0..EVALS)
            .map(|k| {
                let mut s = c.state.clone();
                s.gamma = 0.3 + 0.4 * k as f64;
                (ln_joint_augmented(&c.ys, &oracle_state(&s), &oh), d.ln_pdf(s.gamma))
            })
            .collect()
    };
    assert!(spread(&pairs(&good)) < TOL);
    assert!(spread(&pairs(&bad)) > 1e-3);
}

#[test]
fn collapsed_and_augmented_joints_differ_in_nu() {
    // the ν step is collapsed over W; against the augmented joint it is not constant
    let c = case(5, BetaMode::Jeffreys);
    let oh = oracle_hyper(&c.hyper);
    let nu = nu_conditional(&c.state, &c.obs, &c.hyper).unwrap();
    let pairs: Vec<_> = (0..EVALS)
        .map(|k| {
            let mut s = c.state.clone();
            s.nu = 1.2 + 0.9 * k as f64;
            (ln_joint_augmented(&c.ys, &oracle_state(&s), &oh), nu.ln_density(s.nu))
        })
        .collect();
    assert!(spread(&pairs) > 1e-3);
}
