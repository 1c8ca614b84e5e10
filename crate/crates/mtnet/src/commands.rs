//! The four commands. Each writes into the configured output directory and
//! finishes with a manifest, also when it fails part way.

use std::path::{Path, PathBuf};

use mtnet_core::diagnostics::autocorrelation_diagnostics;
use mtnet_core::gibbs::{posterior_mean_b, run_chain, ChainTrace, GibbsConfig};
use mtnet_core::granger::build_observation_sequence;
use mtnet_core::network::{node_mean_path, per_draw_centrality, CentralityScores, Measure};
use mtnet_core::synth::{denoised_centrality, grid, raw_centrality, run_cell, CellResult, StudyConfig};
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::error::{AppError, Result};
use crate::io::{self, fmt_f64, CsvOut};
use crate::manifest::{Manifest, RunStatus};
use crate::plot::{line_chart, Series};

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.toml";

#[derive(Debug)]
pub struct RunSummary {
    pub status: RunStatus,
    pub out_dir: PathBuf,
    pub artifacts: Vec<PathBuf>,
    /// Cell or chain failures that did not stop the run.
    pub failures: Vec<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Complete => 0,
            RunStatus::Partial | RunStatus::Failed => 2,
        }
    }
}

struct Run<'a> {
    cfg: &'a RunConfig,
    out: PathBuf,
    artifacts: Vec<PathBuf>,
    failures: Vec<String>,
}

impl Run<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn keep(&mut self, p: PathBuf) {
        self.artifacts.push(p);
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(&p, text).map_err(|e| AppError::io(&p, e))?;
        self.keep(p);
        Ok(())
    }
}

/// Validates `cfg`, runs its command and writes the manifest.
pub fn execute(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let out = cfg.paths.output.clone();
    std::fs::create_dir_all(&out).map_err(|e| AppError::io(&out, e))?;
    let mut run = Run {
        cfg,
        out,
        artifacts: Vec::new(),
        failures: Vec::new(),
    };
    let result = run
        .write_text(RESOLVED_CONFIG_FILE, &cfg.to_toml_string())
        .and_then(|_| match cfg.command {
            Command::Simulate => simulate(&mut run),
            Command::Fit => fit(&mut run),
            Command::Granger => granger(&mut run),
            Command::Report => report(&mut run),
        });
    let (status, error) = match &result {
        Err(e) => (RunStatus::Failed, Some(e.to_string())),
        Ok(()) if !run.failures.is_empty() => (RunStatus::Partial, Some(run.failures.join("; "))),
        Ok(()) => (RunStatus::Complete, None),
    };
    let manifest = Manifest::build(
        cfg.command.name(),
        status,
        error,
        cfg.seed,
        &cfg.hash(),
        &run.out,
        &run.artifacts,
    )?;
    manifest.write(&run.out)?;
    result?;
    Ok(RunSummary {
        status,
        out_dir: run.out,
        artifacts: run.artifacts,
        failures: run.failures,
    })
}

fn simulate(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let modes: Vec<_> = cfg.study.beta_modes.iter().map(|&m| cfg.beta.mode_for(m)).collect();
    let cells = grid(&cfg.study.nus, &modes);
    let study = StudyConfig {
        scenario: cfg.scenario(cfg.study.nus[0])?,
        hyper: cfg.hyperparameters(cfg.scenario.n, cfg.beta.mode)?,
        gibbs: cfg.gibbs_config(),
        threshold: cfg.threshold.to_core(),
        method: cfg.method(),
        keep_chains: cfg.study.keep_chains,
    };
    let results: Vec<CellResult> = cells.par_iter().map(|c| run_cell(&study, c)).collect();
    for r in &results {
        if let Err(e) = &r.outcome {
            run.failures.push(format!("cell nu={} beta_mode={}: {e}", r.nu, r.beta_mode.label()));
        }
    }

    let mut header: Vec<String> = ["nu", "beta_mode", "seed", "status", "error"].map(String::from).to_vec();
    for m in Measure::ALL {
        for col in ["true_mean", "raw_mean", "denoised_mean", "raw_mae", "denoised_mae"] {
            header.push(format!("{col}_{}", m.name()));
        }
    }
    header.extend(
        ["raw_threshold", "denoised_threshold", "nu_mean", "gamma_mean", "beta_mean"].map(String::from),
    );
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = CsvOut::create(&run.path("results.csv"), &header_refs)?;
    for r in &results {
        let mut row = vec![fmt_f64(r.nu), r.beta_mode.label().to_string(), r.seed.to_string()];
        match &r.outcome {
            Ok(o) => {
                row.extend(["ok".to_string(), String::new()]);
                for k in 0..4 {
                    for v in [o.true_mean[k], o.raw_mean[k], o.denoised_mean[k], o.raw_mae[k], o.denoised_mae[k]] {
                        row.push(fmt_f64(v));
                    }
                }
                for v in [o.raw_threshold, o.denoised_threshold, o.nu_mean, o.gamma_mean, o.beta_mean] {
                    row.push(fmt_f64(v));
                }
            }
            Err(e) => {
                row.extend(["failed".to_string(), e.clone()]);
                row.resize(header.len(), String::new());
            }
        }
        out.row(&row)?;
    }
    let p = out.finish()?;
    run.keep(p);

    for (k, m) in Measure::ALL.into_iter().enumerate() {
        let mut out = CsvOut::create(
            &run.path(&format!("error_curve_{}.csv", m.name())),
            &["nu", "beta_mode", "raw_mae", "denoised_mae"],
        )?;
        let mut series: Vec<Series> = Vec::new();
        for r in &results {
            let Ok(o) = &r.outcome else { continue };
            out.row([
                fmt_f64(r.nu),
                r.beta_mode.label().to_string(),
                fmt_f64(o.raw_mae[k]),
                fmt_f64(o.denoised_mae[k]),
            ])?;
            let label = r.beta_mode.label();
            for (kind, v, dashed) in [("raw", o.raw_mae[k], true), ("denoised", o.denoised_mae[k], false)] {
                let name = format!("{kind} ({label})");
                match series.iter_mut().find(|s| s.label == name) {
                    Some(s) => s.points.push((r.nu, v)),
                    None => series.push(Series {
                        label: name,
                        points: vec![(r.nu, v)],
                        dashed,
                    }),
                }
            }
        }
        let p = out.finish()?;
        run.keep(p);
        if cfg.output.svg {
            let svg = line_chart(&format!("{} error", m.name()), "nu", "mean absolute error", &series, &[]);
            run.write_text(&format!("error_curve_{}.svg", m.name()), &svg)?;
        }
    }

    if cfg.study.keep_chains {
        let mut out = CsvOut::create(
            &run.path("centrality_chains.csv"),
            &["nu", "beta_mode", "draw", "measure", "value"],
        )?;
        for r in &results {
            let Some(chains) = r.outcome.as_ref().ok().and_then(|o| o.chains.as_ref()) else {
                continue;
            };
            for (m, path) in Measure::ALL.iter().zip(chains) {
                for (d, v) in path.iter().enumerate() {
                    out.row([
                        fmt_f64(r.nu),
                        r.beta_mode.label().to_string(),
                        d.to_string(),
                        m.name().to_string(),
                        fmt_f64(*v),
                    ])?;
                }
            }
        }
        let p = out.finish()?;
        run.keep(p);
    }
    Ok(())
}

fn input_path(cfg: &RunConfig) -> &Path {
    cfg.paths.input.as_deref().expect("validated")
}

fn pool(traces: &[ChainTrace]) -> ChainTrace {
    ChainTrace {
        config: traces[0].config,
        draws: traces.iter().flat_map(|t| t.draws.iter().cloned()).collect(),
        final_state: None,
    }
}

fn write_scores(out: &mut CsvOut, estimator: &str, threshold: f64, s: &CentralityScores) -> Result<()> {
    for i in 0..s.len() {
        out.row([
            estimator.to_string(),
            i.to_string(),
            fmt_f64(threshold),
            fmt_f64(s.out_degree[i]),
            fmt_f64(s.out_closeness[i]),
            fmt_f64(s.out_closeness_norm[i]),
            fmt_f64(s.betweenness[i]),
            fmt_f64(s.eigencentrality[i]),
        ])?;
    }
    Ok(())
}

fn fit(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let obs = io::read_observations(input_path(cfg))?;
    let hyper = cfg.hyperparameters(obs.n(), cfg.beta.mode)?;
    let base = cfg.gibbs_config();
    let traces: Vec<ChainTrace> = (0..cfg.gibbs.chains)
        .into_par_iter()
        .map(|k| {
            let config = GibbsConfig {
                seed: base.chain_seed(k),
                ..base
            };
            run_chain(&obs, &hyper, &config).map_err(|e| match AppError::from(e) {
                AppError::Numerical(m) => AppError::Numerical(format!("chain {k}: {m}")),
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    for (k, t) in traces.iter().enumerate() {
        for p in io::write_trace(&run.out, k, t, cfg.output.binary_b_draws)? {
            run.keep(p);
        }
    }

    let pooled = pool(&traces);
    let mean = posterior_mean_b(&pooled)?;
    let p = io::write_matrix(&run.path("posterior_mean_b.csv"), &mean)?;
    run.keep(p);

    let threshold = cfg.threshold.to_core();
    let (raw_tau, raw) = raw_centrality(&obs, threshold)?;
    let den = denoised_centrality(&pooled, threshold, cfg.method())?;
    let mut out = CsvOut::create(
        &run.path("centrality.csv"),
        &[
            "estimator",
            "node",
            "threshold",
            "out_degree",
            "out_closeness",
            "out_closeness_norm",
            "betweenness",
            "eigencentrality",
        ],
    )?;
    write_scores(&mut out, "raw", raw_tau, &raw)?;
    write_scores(&mut out, "denoised", den.threshold, &den.scores)?;
    let p = out.finish()?;
    run.keep(p);

    let mut out = CsvOut::create(
        &run.path("chain_summary.csv"),
        &["chain", "seed", "draws", "nu_mean", "gamma_mean", "beta_mean"],
    )?;
    let mean_of = |v: Vec<f64>| v.iter().sum::<f64>() / v.len().max(1) as f64;
    for (k, t) in traces.iter().enumerate() {
        out.row([
            k.to_string(),
            base.chain_seed(k).to_string(),
            t.len().to_string(),
            fmt_f64(mean_of(t.nu_path())),
            fmt_f64(mean_of(t.gamma_path())),
            fmt_f64(mean_of(t.beta_path())),
        ])?;
    }
    let p = out.finish()?;
    run.keep(p);
    Ok(())
}

fn granger(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let input = input_path(cfg);
    let panel = io::read_panel(input)?;
    let seq = build_observation_sequence(&panel, &cfg.granger_config()).map_err(|e| match AppError::from(e) {
        AppError::Validation(m) => AppError::input(input, m),
        other => other,
    })?;
    let p = io::write_observations(&run.path("observations.csv"), &seq.observations)?;
    run.keep(p);
    let p = io::write_mask(&run.path("observations_mask.csv"), &seq)?;
    run.keep(p);
    let mut out = CsvOut::create(&run.path("labels.csv"), &["node", "label"])?;
    for (i, l) in panel.labels.iter().enumerate() {
        out.row([i.to_string(), l.clone()])?;
    }
    let p = out.finish()?;
    run.keep(p);
    Ok(())
}

/// Verdict wording for one autocorrelation check.
pub fn verdict(degenerate: bool, pass: bool) -> &'static str {
    if degenerate {
        "degenerate (constant chain)"
    } else if pass {
        "consistent with convergence"
    } else {
        "not consistent with convergence"
    }
}

fn report(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let dir = input_path(cfg);
    let count = io::count_chains(dir);
    if count == 0 {
        return Err(AppError::input(dir, "no trace_chain*.csv files found"));
    }
    let traces = (0..count).map(|k| io::read_trace(dir, k)).collect::<Result<Vec<_>>>()?;
    let pooled = pool(&traces);
    let tau = cfg.threshold.to_core().resolve(&posterior_mean_b(&pooled)?);

    let mut acf_out = CsvOut::create(&run.path("acf.csv"), &["chain", "series", "lag", "acf"])?;
    let mut diag_out = CsvOut::create(
        &run.path("diagnostics.csv"),
        &["chain", "series", "draws", "mean", "band", "lags_outside", "degenerate", "verdict"],
    )?;
    let mut chain_out = CsvOut::create(&run.path("centrality_chains.csv"), &["chain", "draw", "measure", "value"])?;
    let mut charts = Vec::new();
    for (k, t) in traces.iter().enumerate() {
        let per_draw = per_draw_centrality(t.draws.iter().map(|d| &d.b), tau);
        let mut named: Vec<(String, Vec<f64>)> =
            Measure::ALL.iter().map(|&m| (m.name().to_string(), node_mean_path(&per_draw, m))).collect();
        named.push(("nu".into(), t.nu_path()));
        named.push(("gamma".into(), t.gamma_path()));
        named.push(("beta".into(), t.beta_path()));
        for (name, path) in &named[..4] {
            for (d, v) in path.iter().enumerate() {
                chain_out.row([k.to_string(), d.to_string(), name.clone(), fmt_f64(*v)])?;
            }
        }
        let refs: Vec<(&str, &[f64])> = named.iter().map(|(n, p)| (n.as_str(), p.as_slice())).collect();
        let rep = autocorrelation_diagnostics(&refs, cfg.output.max_lag)?;
        let mut series = Vec::new();
        for c in &rep.chains {
            for (lag, r) in c.acf.iter().enumerate() {
                acf_out.row([k.to_string(), c.name.clone(), lag.to_string(), fmt_f64(*r)])?;
            }
            diag_out.row([
                k.to_string(),
                c.name.clone(),
                rep.draws.to_string(),
                fmt_f64(c.mean),
                fmt_f64(rep.band),
                c.lags_outside.to_string(),
                c.degenerate.to_string(),
                verdict(c.degenerate, c.pass).to_string(),
            ])?;
            if !c.acf.is_empty() && Measure::ALL.iter().any(|m| m.name() == c.name) {
                series.push(Series {
                    label: c.name.clone(),
                    points: c.acf.iter().enumerate().map(|(l, &r)| (l as f64, r)).collect(),
                    dashed: false,
                });
            }
        }
        charts.push((k, series, rep.band));
    }
    for out in [acf_out, diag_out, chain_out] {
        let p = out.finish()?;
        run.keep(p);
    }
    if cfg.output.svg {
        for (k, series, band) in charts {
            let svg = line_chart(
                &format!("centrality autocorrelation, chain {k}"),
                "lag",
                "acf",
                &series,
                &[band, -band],
            );
            run.write_text(&format!("acf_chain{k}.svg"), &svg)?;
        }
    }
    Ok(())
}
