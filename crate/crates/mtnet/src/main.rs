use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use mtnet::config::{BetaModeName, Command, RunConfig, ThresholdSpec};
use mtnet::{execute, AppError};

/// Bayesian denoising of networks inferred from noisy matrix observations.
#[derive(Parser, Debug)]
#[command(name = "mtnet", version)]
struct Cli {
    /// simulate | fit | granger | report
    #[arg(value_enum)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Args, Debug)]
struct Overrides {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Price panel, observation file or fit directory, by command.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long, value_enum)]
    beta_mode: Option<BetaModeName>,
    /// `auto` or a number.
    #[arg(long)]
    threshold: Option<ThresholdSpec>,
}

fn build_config(cli: &Cli) -> Result<RunConfig, AppError> {
    let o = &cli.opts;
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::new(cli.command),
    };
    cfg.command = cli.command;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(p) = &o.out {
        cfg.paths.output = p.clone();
    }
    if let Some(p) = &o.input {
        cfg.paths.input = Some(p.clone());
    }
    if let Some(v) = o.sweeps {
        cfg.gibbs.sweeps = v;
    }
    if let Some(v) = o.burn_in {
        cfg.gibbs.burn_in = v;
    }
    if let Some(m) = o.beta_mode {
        cfg.beta.mode = m;
    }
    if let Some(t) = o.threshold {
        cfg.threshold = t;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32, AppError> {
    let cfg = build_config(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.opts.threads {
        if t == 0 {
            return Err(AppError::validation("--threads must be at least 1"));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| AppError::validation(format!("thread pool: {e}")))?;
    let summary = pool.install(|| execute(&cfg))?;
    for f in &summary.failures {
        eprintln!("mtnet: {f}");
    }
    println!(
        "mtnet {}: {:?}, {} artifacts in {}",
        cfg.command.name(),
        summary.status,
        summary.artifacts.len(),
        summary.out_dir.display()
    );
    Ok(summary.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("mtnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
