//! Synthetic data under the model and the simulation-study driver.
//!
//! Ground truth is a directed Erdős–Rényi graph with unit edge weights (or
//! an explicit matrix). Observations follow the mixture representation
//! `W_t ~ IMG((ν+n−1)/2, 2, Σ1)`, `E_t | W_t ~ N(0, W_t, Σ2)`,
//! `Y_t = B + E_t`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::dists::{InvMatrixGamma, MatrixNormal};
use crate::error::{Error, Result};
use crate::gibbs::{posterior_mean_b, run_chain, BetaMode, ChainTrace, GibbsConfig, Hyperparameters, ObservationSet};
use crate::linalg::{spd_factor, spd_factor_jittered, Matrix};
use crate::network::{
    average_scores, binarize, node_mean_path, per_draw_centrality, two_mode_threshold, CentralityScores, DirectedGraph,
    Measure,
};
use crate::rng::{derive_key, substream};

#[derive(Clone, Debug, PartialEq)]
pub enum TruthSpec {
    ErdosRenyi { p: f64 },
    Explicit(Matrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticScenario {
    pub n: usize,
    pub t: usize,
    pub nu: f64,
    pub truth: TruthSpec,
    pub sigma1: Matrix,
    pub sigma2: Matrix,
    pub seed: u64,
}

impl SyntheticScenario {
    /// `n = 10`, `T = 50`, `p = 0.2`, identity scales.
    pub fn default_with(nu: f64, seed: u64) -> Self {
        SyntheticScenario {
            n: 10,
            t: 50,
            nu,
            truth: TruthSpec::ErdosRenyi { p: 0.2 },
            sigma1: Matrix::identity(10),
            sigma2: Matrix::identity(10),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("scenario n must be positive"));
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::domain(format!("scenario nu must be positive, got {}", self.nu)));
        }
        match &self.truth {
            TruthSpec::ErdosRenyi { p } if !(0.0..=1.0).contains(p) => {
                return Err(Error::domain(format!("edge probability must lie in [0, 1], got {p}")))
            }
            TruthSpec::Explicit(m) if m.shape() != (self.n, self.n) => {
                return Err(Error::DimensionMismatch {
                    expected: (self.n, self.n),
                    found: m.shape(),
                })
            }
            _ => {}
        }
        for (name, s) in [("sigma1", &self.sigma1), ("sigma2", &self.sigma2)] {
            if s.shape() != (self.n, self.n) || spd_factor(s).is_err() {
                return Err(Error::domain(format!("scenario {name} must be an SPD {0}x{0} matrix", self.n)));
            }
        }
        Ok(())
    }
}

/// Ground-truth graph and its real-valued matrix.
pub fn generate_truth<R: Rng + ?Sized>(scenario: &SyntheticScenario, rng: &mut R) -> (DirectedGraph, Matrix) {
    let n = scenario.n;
    match &scenario.truth {
        TruthSpec::Explicit(m) => {
            let mut m = m.clone();
            for i in 0..n {
                m[(i, i)] = 0.0;
            }
            (binarize(&m, 0.0), m)
        }
        TruthSpec::ErdosRenyi { p } => {
            let mut g = DirectedGraph::empty(n);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let u: f64 = rng.random();
                        g.set_edge(i, j, u < *p);
                    }
                }
            }
            let m = g.to_matrix();
            (g, m)
        }
    }
}

/// `T` slices `Y_t = B + E_t` with iid matrix-t noise.
pub fn generate_observations<R: Rng + ?Sized>(
    b_true: &Matrix,
    scenario: &SyntheticScenario,
    rng: &mut R,
) -> Result<ObservationSet> {
    let n = scenario.n;
    let nf = n as f64;
    let w_dist = InvMatrixGamma::new((scenario.nu + nf - 1.0) / 2.0, 2.0, &scenario.sigma1)?;
    let s2 = spd_factor(&scenario.sigma2)?;
    let mut ys = Vec::with_capacity(scenario.t);
    for _ in 0..scenario.t {
        let w = w_dist.sample(rng);
        let noise = MatrixNormal::from_factors(Matrix::zeros(n, n), spd_factor_jittered(&w)?, s2.clone())?;
        let mut y = noise.sample(rng);
        y.add_scaled(1.0, b_true);
        if !y.is_finite() {
            return Err(Error::numerical("generated observation overflowed"));
        }
        ys.push(y);
    }
    ObservationSet::new(n, ys)
}

/// Elementwise mean of the observations.
pub fn raw_estimate(obs: &ObservationSet) -> Result<Matrix> {
    if obs.is_empty() {
        return Err(Error::EmptyInput("observation set"));
    }
    Ok(obs.mean())
}

/// How an estimate is turned into a graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    /// Midpoint of a two-means split of the estimate's own off-diagonal
    /// entries.
    Auto,
    Value(f64),
}

impl Threshold {
    pub fn resolve(&self, estimate: &Matrix) -> f64 {
        match *self {
            Threshold::Auto => two_mode_threshold(estimate),
            Threshold::Value(v) => v,
        }
    }
}

/// How the posterior is summarized into centrality scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DenoiseMethod {
    /// Centrality of each binarized draw, averaged over draws.
    DrawAverage,
    /// Centrality of the binarized posterior mean.
    PosteriorMean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Denoised {
    pub posterior_mean: Matrix,
    pub threshold: f64,
    pub scores: CentralityScores,
    /// Per-draw scores (draw-average method only).
    pub per_draw: Vec<CentralityScores>,
}

/// Centrality summary of a chain.
pub fn denoised_centrality(trace: &ChainTrace, threshold: Threshold, method: DenoiseMethod) -> Result<Denoised> {
    let posterior_mean = posterior_mean_b(trace)?;
    let tau = threshold.resolve(&posterior_mean);
    let (scores, per_draw) = match method {
        DenoiseMethod::DrawAverage => {
            let per_draw = per_draw_centrality(trace.draws.iter().map(|d| &d.b), tau);
            (average_scores(&per_draw)?, per_draw)
        }
        DenoiseMethod::PosteriorMean => (CentralityScores::compute(&binarize(&posterior_mean, tau)), Vec::new()),
    };
    Ok(Denoised {
        posterior_mean,
        threshold: tau,
        scores,
        per_draw,
    })
}

/// Centrality of the binarized raw average.
pub fn raw_centrality(obs: &ObservationSet, threshold: Threshold) -> Result<(f64, CentralityScores)> {
    let raw = raw_estimate(obs)?;
    let tau = threshold.resolve(&raw);
    Ok((tau, CentralityScores::compute(&binarize(&raw, tau))))
}

/// One `(ν, β-mode)` cell of a study.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSpec {
    pub nu: f64,
    pub beta_mode: BetaMode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub scenario: SyntheticScenario,
    pub hyper: Hyperparameters,
    pub gibbs: GibbsConfig,
    pub threshold: Threshold,
    pub method: DenoiseMethod,
    /// Keep the node-averaged centrality chains in the result.
    pub keep_chains: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellOutcome {
    pub true_mean: [f64; 4],
    pub raw_mean: [f64; 4],
    pub denoised_mean: [f64; 4],
    pub raw_mae: [f64; 4],
    pub denoised_mae: [f64; 4],
    pub raw_threshold: f64,
    pub denoised_threshold: f64,
    pub gamma_mean: f64,
    pub beta_mean: f64,
    pub nu_mean: f64,
    /// Node-averaged centrality per recorded draw, one path per measure.
    pub chains: Option<[Vec<f64>; 4]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub nu: f64,
    pub beta_mode: BetaMode,
    pub seed: u64,
    pub outcome: core::result::Result<CellOutcome, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub cells: Vec<CellResult>,
}

/// Substream tags. The truth depends only on the study seed; data on
/// `(seed, ν)`, so cells differing only in β-mode see the same data; chains
/// on the full cell.
pub mod stream {
    pub const TRUTH: u64 = 0x7275_7468;
    pub const DATA: u64 = 0x6461_7461;
    pub const CHAIN: u64 = 0x0063_686e;
}

fn mode_tag(mode: &BetaMode) -> u64 {
    match *mode {
        BetaMode::Fixed(b) => 0x10 ^ b.to_bits(),
        BetaMode::Jeffreys => 0x20,
        BetaMode::InverseGamma { shape, scale } => 0x30 ^ shape.to_bits() ^ scale.to_bits().rotate_left(17),
    }
}

/// Runs one cell. Numerical failures are captured in the result.
pub fn run_cell(study: &StudyConfig, cell: &CellSpec) -> CellResult {
    let seed = study.scenario.seed;
    let outcome = run_cell_inner(study, cell).map_err(|e| format!("{e}"));
    CellResult {
        nu: cell.nu,
        beta_mode: cell.beta_mode,
        seed,
        outcome,
    }
}

fn run_cell_inner(study: &StudyConfig, cell: &CellSpec) -> Result<CellOutcome> {
    let mut scenario = study.scenario.clone();
    scenario.nu = cell.nu;
    scenario.validate()?;
    let seed = scenario.seed;
    let (truth_graph, b_true) = generate_truth(&scenario, &mut substream(seed, &[stream::TRUTH]));
    let obs = generate_observations(&b_true, &scenario, &mut substream(seed, &[stream::DATA, cell.nu.to_bits()]))?;
    let mut hyper = study.hyper.clone();
    hyper.beta_mode = cell.beta_mode;
    let gibbs = GibbsConfig {
        seed: derive_key(seed, &[stream::CHAIN, cell.nu.to_bits(), mode_tag(&cell.beta_mode)]),
        ..study.gibbs
    };
    let trace = run_chain(&obs, &hyper, &gibbs)?;
    let truth = CentralityScores::compute(&truth_graph);
    let (raw_threshold, raw) = raw_centrality(&obs, study.threshold)?;
    let den = denoised_centrality(&trace, study.threshold, study.method)?;
    let per = |f: &dyn Fn(Measure) -> f64| -> [f64; 4] { Measure::ALL.map(f) };
    let mean_of = |v: Vec<f64>| v.iter().sum::<f64>() / v.len().max(1) as f64;
    let chains = (study.keep_chains && !den.per_draw.is_empty())
        .then(|| Measure::ALL.map(|m| node_mean_path(&den.per_draw, m)));
    Ok(CellOutcome {
        true_mean: per(&|m| truth.node_mean(m)),
        raw_mean: per(&|m| raw.node_mean(m)),
        denoised_mean: per(&|m| den.scores.node_mean(m)),
        raw_mae: per(&|m| raw.mae(&truth, m)),
        denoised_mae: per(&|m| den.scores.mae(&truth, m)),
        raw_threshold,
        denoised_threshold: den.threshold,
        gamma_mean: mean_of(trace.gamma_path()),
        beta_mean: mean_of(trace.beta_path()),
        nu_mean: mean_of(trace.nu_path()),
        chains,
    })
}

/// The cross product of `nus` and `modes`, ν-major.
pub fn grid(nus: &[f64], modes: &[BetaMode]) -> Vec<CellSpec> {
    nus.iter()
        .flat_map(|&nu| modes.iter().map(move |&beta_mode| CellSpec { nu, beta_mode }))
        .collect()
}

/// Serial study driver; the std companion crate runs cells in parallel
/// through [`run_cell`] with identical results.
pub fn run_simulation_study(study: &StudyConfig, cells: &[CellSpec]) -> Result<ExperimentResult> {
    if cells.is_empty() {
        return Err(Error::EmptyInput("simulation grid"));
    }
    Ok(ExperimentResult {
        cells: cells.iter().map(|c| run_cell(study, c)).collect(),
    })
}
