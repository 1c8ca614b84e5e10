//! Run configuration: a TOML document with one section per concern. Every
//! field has a default; unknown keys are rejected.

use std::path::{Path, PathBuf};

use mtnet_core::gibbs::{BetaMode, GibbsConfig, Hyperparameters};
use mtnet_core::granger::GrangerConfig;
use mtnet_core::synth::{DenoiseMethod, SyntheticScenario, Threshold, TruthSpec};
use mtnet_core::Matrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Fit,
    Granger,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Fit => "fit",
            Command::Granger => "granger",
            Command::Report => "report",
        }
    }

    fn reads_input(self) -> bool {
        !matches!(self, Command::Simulate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threshold: ThresholdSpec,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub gibbs: GibbsSection,
    #[serde(default)]
    pub hyper: HyperSection,
    #[serde(default)]
    pub beta: BetaSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub granger: GrangerSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Price panel (`granger`), observation file (`fit`) or fit output
    /// directory (`report`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub output: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            input: None,
            output: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GibbsSection {
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
}

impl Default for GibbsSection {
    fn default() -> Self {
        let d = GibbsConfig::default();
        GibbsSection {
            sweeps: d.sweeps,
            burn_in: d.burn_in,
            thin: d.thin,
            chains: 1,
        }
    }
}

/// A matrix given either as a multiple of the identity or row by row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Scaled(f64),
    Rows(Vec<Vec<f64>>),
}

impl Default for MatrixSpec {
    fn default() -> Self {
        MatrixSpec::Scaled(1.0)
    }
}

impl MatrixSpec {
    pub fn resolve(&self, n: usize, field: &str) -> Result<Matrix> {
        match self {
            MatrixSpec::Scaled(s) => Ok(Matrix::identity(n).scale(*s)),
            MatrixSpec::Rows(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(AppError::validation(format!("{field} must be a {n}x{n} matrix")));
                }
                Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperSection {
    pub omega1: MatrixSpec,
    pub omega2: MatrixSpec,
    pub phi1: MatrixSpec,
    pub phi2: MatrixSpec,
    /// Defaults to `n` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    pub a_gamma: f64,
    pub b_gamma: f64,
    pub a_nu: f64,
    pub b_nu: f64,
}

impl Default for HyperSection {
    fn default() -> Self {
        let d = Hyperparameters::default_for(1);
        HyperSection {
            omega1: MatrixSpec::default(),
            omega2: MatrixSpec::default(),
            phi1: MatrixSpec::default(),
            phi2: MatrixSpec::default(),
            delta1: None,
            delta2: None,
            a_gamma: d.a_gamma,
            b_gamma: d.b_gamma,
            a_nu: d.a_nu,
            b_nu: d.b_nu,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum BetaModeName {
    Fixed,
    Jeffreys,
    InverseGamma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetaSection {
    pub mode: BetaModeName,
    /// β under the fixed mode.
    pub fixed_value: f64,
    /// Inverse-gamma prior shape and scale.
    pub prior_shape: f64,
    pub prior_scale: f64,
}

impl Default for BetaSection {
    fn default() -> Self {
        BetaSection {
            mode: BetaModeName::InverseGamma,
            fixed_value: 2.0,
            prior_shape: 3.0,
            prior_scale: 1.0,
        }
    }
}

impl BetaSection {
    pub fn mode_for(&self, name: BetaModeName) -> BetaMode {
        match name {
            BetaModeName::Fixed => BetaMode::Fixed(self.fixed_value),
            BetaModeName::Jeffreys => BetaMode::Jeffreys,
            BetaModeName::InverseGamma => BetaMode::InverseGamma {
                shape: self.prior_shape,
                scale: self.prior_scale,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub n: usize,
    pub t: usize,
    pub edge_probability: f64,
    /// Explicit ground truth; overrides `edge_probability`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<Vec<f64>>>,
    pub sigma1: MatrixSpec,
    pub sigma2: MatrixSpec,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            n: 10,
            t: 50,
            edge_probability: 0.2,
            truth: None,
            sigma1: MatrixSpec::default(),
            sigma2: MatrixSpec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    DrawAverage,
    PosteriorMean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    pub nus: Vec<f64>,
    pub beta_modes: Vec<BetaModeName>,
    pub method: MethodName,
    /// Emit the node-averaged centrality chain of every cell.
    pub keep_chains: bool,
}

impl Default for StudySection {
    fn default() -> Self {
        StudySection {
            nus: vec![1.0, 2.0, 5.0, 10.0, 20.0],
            beta_modes: vec![BetaModeName::InverseGamma, BetaModeName::Fixed],
            method: MethodName::DrawAverage,
            keep_chains: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrangerSection {
    pub lag: usize,
    pub window: usize,
    pub log_returns: bool,
}

impl Default for GrangerSection {
    fn default() -> Self {
        let d = GrangerConfig::default();
        GrangerSection {
            lag: d.lag,
            window: d.window,
            log_returns: d.log_returns,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Store `B` draws in a binary file instead of the long-format trace.
    pub binary_b_draws: bool,
    pub svg: bool,
    /// Autocorrelation lags checked by `report`.
    pub max_lag: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            binary_b_draws: false,
            svg: true,
            max_lag: mtnet_core::diagnostics::DEFAULT_MAX_LAG,
        }
    }
}

/// `"auto"` or a number.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "ThresholdRepr", into = "ThresholdRepr")]
pub enum ThresholdSpec {
    #[default]
    Auto,
    Value(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ThresholdRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<ThresholdRepr> for ThresholdSpec {
    type Error = String;

    fn try_from(r: ThresholdRepr) -> std::result::Result<Self, String> {
        match r {
            ThresholdRepr::Number(v) => Ok(ThresholdSpec::Value(v)),
            ThresholdRepr::Text(s) if s == "auto" => Ok(ThresholdSpec::Auto),
            ThresholdRepr::Text(s) => Err(format!("threshold must be \"auto\" or a number, got \"{s}\"")),
        }
    }
}

impl From<ThresholdSpec> for ThresholdRepr {
    fn from(t: ThresholdSpec) -> Self {
        match t {
            ThresholdSpec::Auto => ThresholdRepr::Text("auto".into()),
            ThresholdSpec::Value(v) => ThresholdRepr::Number(v),
        }
    }
}

impl std::str::FromStr for ThresholdSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(ThresholdSpec::Auto);
        }
        s.parse::<f64>()
            .map(ThresholdSpec::Value)
            .map_err(|_| format!("threshold must be \"auto\" or a number, got \"{s}\""))
    }
}

impl ThresholdSpec {
    pub fn to_core(self) -> Threshold {
        match self {
            ThresholdSpec::Auto => Threshold::Auto,
            ThresholdSpec::Value(v) => Threshold::Value(v),
        }
    }
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AppError::validation(format!("{field} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Minimal configuration for `command` with every default filled.
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            seed: 0,
            threshold: ThresholdSpec::default(),
            paths: Paths::default(),
            gibbs: GibbsSection::default(),
            hyper: HyperSection::default(),
            beta: BetaSection::default(),
            scenario: ScenarioSection::default(),
            study: StudySection::default(),
            granger: GrangerSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| AppError::validation(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        toml::from_str(&text).map_err(|e| AppError::input(path, e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// SHA-256 of the normalized configuration, excluding the output path.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.paths.output = PathBuf::new();
        let digest = Sha256::digest(c.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.gibbs;
        if g.sweeps <= g.burn_in {
            return Err(AppError::validation(format!(
                "gibbs.sweeps ({}) must exceed gibbs.burn_in ({})",
                g.sweeps, g.burn_in
            )));
        }
        if g.thin == 0 {
            return Err(AppError::validation("gibbs.thin must be at least 1"));
        }
        if g.chains == 0 {
            return Err(AppError::validation("gibbs.chains must be at least 1"));
        }
        if self.command.reads_input() {
            match &self.paths.input {
                None => {
                    return Err(AppError::validation(format!(
                        "paths.input is required for `{}`",
                        self.command.name()
                    )))
                }
                Some(p) if !p.exists() => {
                    return Err(AppError::validation(format!("paths.input {} does not exist", p.display())))
                }
                _ => {}
            }
        }
        if let ThresholdSpec::Value(v) = self.threshold {
            if !v.is_finite() {
                return Err(AppError::validation("threshold must be finite"));
            }
        }
        let h = &self.hyper;
        for (field, v) in [
            ("hyper.a_gamma", h.a_gamma),
            ("hyper.b_gamma", h.b_gamma),
            ("hyper.a_nu", h.a_nu),
            ("hyper.b_nu", h.b_nu),
            ("beta.fixed_value", self.beta.fixed_value),
            ("beta.prior_shape", self.beta.prior_shape),
            ("beta.prior_scale", self.beta.prior_scale),
        ] {
            check_positive(field, v)?;
        }
        let s = &self.scenario;
        if s.n == 0 || s.t == 0 {
            return Err(AppError::validation("scenario.n and scenario.t must be positive"));
        }
        if !(0.0..=1.0).contains(&s.edge_probability) {
            return Err(AppError::validation(format!(
                "scenario.edge_probability must lie in [0, 1], got {}",
                s.edge_probability
            )));
        }
        if self.study.nus.is_empty() {
            return Err(AppError::validation("study.nus must not be empty"));
        }
        if let Some(bad) = self.study.nus.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(AppError::validation(format!("study.nus entries must be positive, got {bad}")));
        }
        if self.study.beta_modes.is_empty() {
            return Err(AppError::validation("study.beta_modes must not be empty"));
        }
        self.granger_config()
            .validate()
            .map_err(|e| AppError::validation(format!("granger.lag/granger.window: {e}")))?;
        if self.output.max_lag == 0 {
            return Err(AppError::validation("output.max_lag must be at least 1"));
        }
        if self.command == Command::Simulate {
            self.scenario(self.study.nus[0])?;
            self.hyperparameters(s.n, self.beta.mode)?;
        }
        Ok(())
    }

    pub fn gibbs_config(&self) -> GibbsConfig {
        GibbsConfig {
            sweeps: self.gibbs.sweeps,
            burn_in: self.gibbs.burn_in,
            thin: self.gibbs.thin,
            seed: self.seed,
        }
    }

    pub fn granger_config(&self) -> GrangerConfig {
        GrangerConfig {
            lag: self.granger.lag,
            window: self.granger.window,
            log_returns: self.granger.log_returns,
        }
    }

    pub fn hyperparameters(&self, n: usize, mode: BetaModeName) -> Result<Hyperparameters> {
        let h = &self.hyper;
        let hyper = Hyperparameters {
            omega1: h.omega1.resolve(n, "hyper.omega1")?,
            omega2: h.omega2.resolve(n, "hyper.omega2")?,
            phi1: h.phi1.resolve(n, "hyper.phi1")?,
            phi2: h.phi2.resolve(n, "hyper.phi2")?,
            delta1: h.delta1.unwrap_or(n as f64),
            delta2: h.delta2.unwrap_or(n as f64),
            a_gamma: h.a_gamma,
            b_gamma: h.b_gamma,
            a_nu: h.a_nu,
            b_nu: h.b_nu,
            beta_mode: self.beta.mode_for(mode),
        };
        hyper
            .validate(n)
            .map_err(|e| AppError::validation(format!("hyper: {e}")))?;
        Ok(hyper)
    }

    pub fn scenario(&self, nu: f64) -> Result<SyntheticScenario> {
        let s = &self.scenario;
        let truth = match &s.truth {
            Some(rows) => TruthSpec::Explicit(MatrixSpec::Rows(rows.clone()).resolve(s.n, "scenario.truth")?),
            None => TruthSpec::ErdosRenyi { p: s.edge_probability },
        };
        let scenario = SyntheticScenario {
            n: s.n,
            t: s.t,
            nu,
            truth,
            sigma1: s.sigma1.resolve(s.n, "scenario.sigma1")?,
            sigma2: s.sigma2.resolve(s.n, "scenario.sigma2")?,
            seed: self.seed,
        };
        scenario
            .validate()
            .map_err(|e| AppError::validation(format!("scenario: {e}")))?;
        Ok(scenario)
    }

    pub fn method(&self) -> DenoiseMethod {
        match self.study.method {
            MethodName::DrawAverage => DenoiseMethod::DrawAverage,
            MethodName::PosteriorMean => DenoiseMethod::PosteriorMean,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_is_fully_defaulted() {
        let c = RunConfig::from_toml_str("command = \"simulate\"").unwrap();
        assert_eq!(c, RunConfig::new(Command::Simulate));
        assert_eq!(c.gibbs.sweeps, 2000);
        assert_eq!(c.threshold, ThresholdSpec::Auto);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml_str("command = \"fit\"\n[gibbs]\nsweep = 10\n").unwrap_err();
        assert!(err.to_string().contains("sweep"), "{err}");
        assert!(RunConfig::from_toml_str("command = \"fit\"\ncolour = 1\n").is_err());
    }

    #[test]
    fn parse_errors_carry_line_information() {
        let err = RunConfig::from_toml_str("command = \"simulate\"\n\n[gibbs]\nsweeps = \"many\"\n").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }

    #[test]
    fn sweeps_not_above_burn_in_names_both_fields() {
        let c = RunConfig::from_toml_str("command = \"simulate\"\n[gibbs]\nsweeps = 100\nburn_in = 100\n").unwrap();
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("gibbs.sweeps") && msg.contains("gibbs.burn_in"), "{msg}");
    }

    #[test]
    fn round_trip_is_identity() {
        let text = r#"
command = "simulate"
seed = 42
threshold = 0.4
[hyper]
omega1 = [[2.0, 0.5], [0.5, 1.0]]
phi2 = 3
delta1 = 4.5
[beta]
mode = "jeffreys"
[study]
nus = [2.0, 5.0]
beta_modes = ["fixed", "jeffreys"]
method = "posterior_mean"
"#;
        let c = RunConfig::from_toml_str(text).unwrap();
        let again = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.to_toml_string(), again.to_toml_string());
        assert_eq!(c.hyper.phi2, MatrixSpec::Scaled(3.0));
        assert_eq!(c.threshold, ThresholdSpec::Value(0.4));
    }

    #[test]
    fn matrix_dimension_errors_name_the_field() {
        let c = RunConfig::from_toml_str("command = \"simulate\"\n[hyper]\nomega2 = [[1.0]]\n").unwrap();
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("hyper.omega2"), "{msg}");
    }

    #[test]
    fn read_commands_need_an_existing_input() {
        let c = RunConfig::new(Command::Fit);
        assert!(c.validate().unwrap_err().to_string().contains("paths.input"));
        let mut c = RunConfig::new(Command::Granger);
        c.paths.input = Some(PathBuf::from("/definitely/not/here.csv"));
        assert!(c.validate().unwrap_err().to_string().contains("does not exist"));
    }

    #[test]
    fn hash_ignores_output_location() {
        let mut a = RunConfig::new(Command::Simulate);
        let h = a.hash();
        a.paths.output = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), h);
        a.seed = 1;
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn threshold_text_is_checked() {
        assert!(RunConfig::from_toml_str("command = \"fit\"\nthreshold = \"median\"\n").is_err());
        assert_eq!("auto".parse::<ThresholdSpec>().unwrap(), ThresholdSpec::Auto);
        assert_eq!("0.25".parse::<ThresholdSpec>().unwrap(), ThresholdSpec::Value(0.25));
    }
}
