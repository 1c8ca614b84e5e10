use mtnet::io::{read_observations, read_trace, write_observations, write_trace};
use mtnet_core::gibbs::{posterior_mean_b, run_chain, GibbsConfig, Hyperparameters};
use mtnet_core::rng::substream;
use mtnet_core::synth::{generate_observations, generate_truth, SyntheticScenario};

fn chain() -> (mtnet_core::gibbs::ObservationSet, mtnet_core::gibbs::ChainTrace) {
    let mut sc = SyntheticScenario::default_with(4.0, 3);
    sc.n = 3;
    sc.t = 8;
    sc.sigma1 = mtnet_core::Matrix::identity(3);
    sc.sigma2 = mtnet_core::Matrix::identity(3);
    let (_, b) = generate_truth(&sc, &mut substream(3, &[1]));
    let obs = generate_observations(&b, &sc, &mut substream(3, &[2])).unwrap();
    let cfg = GibbsConfig {
        sweeps: 120,
        burn_in: 20,
        thin: 2,
        seed: 17,
    };
    let trace = run_chain(&obs, &Hyperparameters::default_for(3), &cfg).unwrap();
    (obs, trace)
}

#[test]
fn trace_round_trip_reproduces_the_posterior_mean() {
    let (_, trace) = chain();
    let want = posterior_mean_b(&trace).unwrap();
    for binary in [false, true] {
        let dir = tempfile::tempdir().unwrap();
        let files = write_trace(dir.path(), 0, &trace, binary).unwrap();
        assert_eq!(files.len(), 1 + usize::from(binary));
        let back = read_trace(dir.path(), 0).unwrap();
        assert!(posterior_mean_b(&back).unwrap().max_abs_diff(&want) < 1e-12);
        assert_eq!(back.draws, trace.draws, "floats are stored exactly");
        // the trailing unrecorded sweep of a thinned chain leaves no trace
        assert_eq!((back.config.sweeps, back.config.burn_in, back.config.thin), (119, 20, 2));
    }
}

#[test]
fn observation_file_round_trips_exactly() {
    let (obs, _) = chain();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("obs.csv");
    write_observations(&p, &obs).unwrap();
    assert_eq!(read_observations(&p).unwrap(), obs);
}

#[test]
fn truncated_binary_draws_are_rejected() {
    let (_, trace) = chain();
    let dir = tempfile::tempdir().unwrap();
    let files = write_trace(dir.path(), 0, &trace, true).unwrap();
    let bytes = std::fs::read(&files[1]).unwrap();
    std::fs::write(&files[1], &bytes[..bytes.len() - 8]).unwrap();
    let err = read_trace(dir.path(), 0).unwrap_err();
    assert!(err.to_string().contains("truncated"), "{err}");
}
