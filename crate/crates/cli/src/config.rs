//! Experiment configuration: a JSON document with top-level keys `lattice`,
//! `decay`, `sites`, `interaction`, `observables`, `grid` and `run`. Unknown
//! keys are rejected and every error names the offending field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecaySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<SitesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<InteractionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<ObservablesSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub run: RunSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatticeSpec {
    Chain { length: usize },
    Grid2d { width: usize, height: usize },
    Explicit { distances: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    /// `(1 + r)^{-p}`
    Power,
    /// `e^{-ar} (1 + r)^{-p}`
    ExpPower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub kind: DecayKind,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub a: f64,
    /// Extra exponential weight `e^{-weight r}` applied on top.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SitesSpec {
    Spin {
        #[serde(default = "two")]
        local_dim: usize,
        #[serde(default)]
        field: [f64; 3],
    },
    Oscillator { n_levels: usize, lambda: f64 },
    Explicit { matrix: MatrixSpec },
}

fn two() -> usize {
    2
}

/// Matrix entry: a real number or `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex { re: f64, im: f64 },
}

pub type MatrixSpec = Vec<Vec<Entry>>;

/// Either a named operator or an explicit matrix, times `scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub named: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub sites: Vec<usize>,
    pub op: OpSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeTermSpec {
    pub size: usize,
    pub op: OpSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteractionSpec {
    /// The same bond on every nearest-neighbour pair.
    NnCoupling {
        bond: OpSpec,
        #[serde(default = "one")]
        coupling: f64,
    },
    /// Each term on every subset of its size with diameter at most `r`.
    RangeR { r: f64, terms: Vec<RangeTermSpec> },
    Explicit { terms: Vec<TermSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSpec {
    pub a: TermSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_horizon() -> f64 {
    2.0
}

fn default_points() -> usize {
    81
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { horizon: default_horizon(), points: default_points() }
    }
}

/// A volume given as a site count (the first `n` sites) or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VolumeSpec {
    Count(usize),
    Sites(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Nested volumes for `converge`; every earlier volume is compared with the last.
    #[serde(default)]
    pub volumes: Vec<VolumeSpec>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub propagator: PropagatorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec { volumes: Vec::new(), tol: default_tol(), propagator: PropagatorSpec::default(), sweep: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorSpec {
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_window")]
    pub window: f64,
}

fn default_instances() -> usize {
    100
}

fn default_max_dim() -> usize {
    16
}

fn default_window() -> f64 {
    1.0
}

impl Default for PropagatorSpec {
    fn default() -> Self {
        PropagatorSpec { instances: default_instances(), max_dim: default_max_dim(), seed: 0, window: default_window() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// JSON pointer into the resolved config, e.g. `/sites/lambda`.
    pub field: String,
    pub values: Vec<f64>,
    #[serde(default = "default_sweep_command")]
    pub command: String,
}

fn default_sweep_command() -> String {
    "certify".into()
}

impl Config {
    pub fn from_json(text: &str) -> CliResult<Config> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(if path.is_empty() { "<root>".into() } else { path }, e.into_inner())
        })?;
        cfg.check_scalars()?;
        Ok(cfg)
    }

    pub fn from_value(value: serde_json::Value) -> CliResult<Config> {
        let cfg: Config = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(if path.is_empty() { "<root>".into() } else { path }, e.into_inner())
        })?;
        cfg.check_scalars()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Config::from_json(&text)
    }

    /// The config with all defaults filled in.
    pub fn resolved(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    fn check_scalars(&self) -> CliResult<()> {
        if !(self.grid.horizon > 0.0) || !self.grid.horizon.is_finite() {
            return Err(CliError::config("grid.horizon", "must be positive and finite"));
        }
        if self.grid.points < 2 {
            return Err(CliError::config("grid.points", "need at least 2 points"));
        }
        if !(self.run.tol > 0.0) || !self.run.tol.is_finite() {
            return Err(CliError::config("run.tol", "tolerance must be positive"));
        }
        let p = &self.run.propagator;
        if p.max_dim < 2 {
            return Err(CliError::config("run.propagator.max_dim", "must be at least 2"));
        }
        if !(p.window > 0.0) || !p.window.is_finite() {
            return Err(CliError::config("run.propagator.window", "must be positive"));
        }
        Ok(())
    }
}
