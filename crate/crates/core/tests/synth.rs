mod common;

use mtnet_core::gibbs::{BetaMode, GibbsConfig, Hyperparameters};
use mtnet_core::network::Measure;
use mtnet_core::rng::substream;
use mtnet_core::synth::*;
use mtnet_core::Matrix;

fn small_study(n: usize, t: usize, sweeps: usize, seed: u64) -> StudyConfig {
    let mut scenario = SyntheticScenario::default_with(5.0, seed);
    scenario.n = n;
    scenario.t = t;
    scenario.sigma1 = Matrix::identity(n);
    scenario.sigma2 = Matrix::identity(n);
    StudyConfig {
        scenario,
        hyper: Hyperparameters::default_for(n),
        gibbs: GibbsConfig { sweeps, burn_in: sweeps / 4, thin: 1, seed: 0 },
        threshold: Threshold::Auto,
        method: DenoiseMethod::DrawAverage,
        keep_chains: true,
    }
}

#[test]
fn erdos_renyi_edge_count_matches_binomial_mean() {
    let mut s = SyntheticScenario::default_with(5.0, 0);
    s.n = 20;
    s.truth = TruthSpec::ErdosRenyi { p: 0.3 };
    let reps = 1000;
    let counts: Vec<f64> =
        (0..reps).map(|k| generate_truth(&s, &mut substream(k, &[9])).0.edge_count() as f64).collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let pairs = 20.0 * 19.0;
    let se = (pairs * 0.3 * 0.7 / reps as f64).sqrt();
    assert!((mean - 0.3 * pairs).abs() < 4.0 * se, "{mean}");
}

#[test]
fn single_cell_runs_end_to_end() {
    let study = small_study(6, 20, 600, 4);
    let res = run_simulation_study(&study, &grid(&[3.0], &[BetaMode::Jeffreys])).unwrap();
    assert_eq!(res.cells.len(), 1);
    let out = res.cells[0].outcome.as_ref().unwrap();
    assert!(out.raw_mae.iter().chain(&out.denoised_mae).all(|&e| e >= 0.0 && e.is_finite()));
    assert_eq!(out.chains.as_ref().unwrap()[0].len(), 600 - 150);
    assert!(out.gamma_mean > 0.0 && out.beta_mean > 0.0 && out.nu_mean > 1.0);
}

#[test]
fn vanishing_noise_cell_has_no_error() {
    let mut study = small_study(5, 15, 400, 5);
    study.scenario.sigma1 = Matrix::identity(5).scale(1e-8);
    study.scenario.sigma2 = Matrix::identity(5).scale(1e-8);
    let r = run_cell(&study, &CellSpec { nu: 5.0, beta_mode: BetaMode::InverseGamma { shape: 3.0, scale: 1.0 } });
    let out = r.outcome.unwrap();
    for k in 0..4 {
        assert!(out.raw_mae[k] < 1e-3 && out.denoised_mae[k] < 1e-3, "{out:?}");
    }
}

#[test]
fn raw_error_grows_with_heavier_tails() {
    let mut wins = 0;
    for seed in 1..=5u64 {
        let err = |nu: f64| {
            let s = SyntheticScenario::default_with(nu, seed);
            let (g, b) = generate_truth(&s, &mut substream(seed, &[stream::TRUTH]));
            let obs = generate_observations(&b, &s, &mut substream(seed, &[stream::DATA, nu.to_bits()])).unwrap();
            let truth = mtnet_core::network::CentralityScores::compute(&g);
            let (_, raw) = raw_centrality(&obs, Threshold::Auto).unwrap();
            Measure::ALL[..3].iter().map(|&m| raw.mae(&truth, m)).sum::<f64>()
        };
        wins += usize::from(err(2.0) > err(20.0));
    }
    assert!(wins >= 3, "{wins}/5");
}

#[test]
fn study_is_deterministic_and_records_failures() {
    let study = small_study(4, 10, 200, 6);
    let cells = vec![
        CellSpec { nu: 4.0, beta_mode: BetaMode::Fixed(2.0) },
        CellSpec { nu: -1.0, beta_mode: BetaMode::Fixed(2.0) },
        CellSpec { nu: 4.0, beta_mode: BetaMode::Jeffreys },
    ];
    let a = run_simulation_study(&study, &cells).unwrap();
    assert_eq!(a, run_simulation_study(&study, &cells).unwrap());
    assert!(a.cells[0].outcome.is_ok() && a.cells[2].outcome.is_ok());
    assert!(a.cells[1].outcome.as_ref().unwrap_err().contains("nu"));
    // paired data, distinct chains
    let (x, z) = (a.cells[0].outcome.as_ref().unwrap(), a.cells[2].outcome.as_ref().unwrap());
    assert_eq!(x.raw_mae, z.raw_mae);
    assert_ne!(x.chains, z.chains);
    assert!(run_simulation_study(&study, &[]).is_err());
}
