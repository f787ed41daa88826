//! Experiment configuration, read from TOML.
//!
//! Every optional field has a documented default. [`ExperimentConfig::resolve`]
//! fills them in, so a resolved configuration written to a manifest is a
//! complete description of the run.

use std::path::{Path, PathBuf};

use qmps_core::ansatz::Template;
use qmps_core::evolve::{InitScheme, SpsaSchedule, StochasticOptions, DEFAULT_GAIN};
use qmps_core::tfim::{QuenchSpec, TrotterOrder};
use serde::{Deserialize, Serialize};

use crate::error::{config_error, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Quench,
    ExactInAnsatz,
    Ensemble,
    OracleCurve,
    GaugeAnalysis,
    TrotterStudy,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Quench => "quench",
            Self::ExactInAnsatz => "exact_in_ansatz",
            Self::Ensemble => "ensemble",
            Self::OracleCurve => "oracle_curve",
            Self::GaugeAnalysis => "gauge_analysis",
            Self::TrotterStudy => "trotter_study",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchConfig {
    #[serde(default = "one")]
    pub j: f64,
    pub g0: f64,
    pub g1: f64,
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "first_order")]
    pub trotter_order: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpsaConfig {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_gain")]
    pub a: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Stability constant; defaults to a tenth of `steps`.
    pub big_a: Option<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// First-iteration move cap used to calibrate `a`; 0 disables it.
    #[serde(default = "default_move")]
    pub calibrate_move: f64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_factor: usize,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            a: default_gain(),
            c: default_c(),
            big_a: None,
            alpha: default_alpha(),
            gamma: default_gamma(),
            calibrate_move: default_move(),
            bootstrap_factor: default_bootstrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_k_points")]
    pub k_points: usize,
    #[serde(default = "default_ed_sites")]
    pub ed_sites: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            k_points: default_k_points(),
            ed_sites: default_ed_sites(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterStudyConfig {
    /// First-order step of the reference curve.
    #[serde(default = "default_reference_dt")]
    pub reference_dt: f64,
}

impl Default for TrotterStudyConfig {
    fn default() -> Self {
        Self {
            reference_dt: default_reference_dt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    /// Stored trajectory table to analyse; computed from the config if absent.
    pub trajectory: Option<PathBuf>,
    /// Number of `φ7` values in the reparametrisation sweep.
    #[serde(default = "default_sweep")]
    pub sweep_points: usize,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        Self {
            trajectory: None,
            sweep_points: default_sweep(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Stem of the output files; defaults to the kind.
    pub name: Option<String>,
    #[serde(default = "default_template")]
    pub template: String,
    #[serde(default = "default_init")]
    pub init_scheme: String,
    /// Shots per cost evaluation; absent means the exact success probability.
    pub shots_per_eval: Option<u64>,
    pub n_runs: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub output: Option<PathBuf>,
    pub quench: QuenchConfig,
    #[serde(default)]
    pub spsa: SpsaConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub trotter: TrotterStudyConfig,
    #[serde(default)]
    pub gauge: GaugeConfig,
}

fn one() -> f64 {
    1.0
}
fn first_order() -> u32 {
    1
}
fn default_steps() -> usize {
    6
}
fn default_gain() -> f64 {
    DEFAULT_GAIN
}
fn default_c() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    0.602
}
fn default_gamma() -> f64 {
    0.101
}
fn default_move() -> f64 {
    0.1
}
fn default_bootstrap() -> usize {
    4
}
fn default_k_points() -> usize {
    4096
}
fn default_ed_sites() -> usize {
    12
}
fn default_reference_dt() -> f64 {
    0.1
}
fn default_sweep() -> usize {
    16
}
fn default_template() -> String {
    Template::Reduced8.name().into()
}
fn default_init() -> String {
    InitScheme::Extrapolate.name().into()
}

/// Keys a manifest adds on top of the configuration.
pub const MANIFEST_SECTIONS: [&str; 2] = ["manifest", "result"];

impl ExperimentConfig {
    /// Parses TOML text. Manifest sections are ignored, so a manifest is
    /// itself a valid configuration.
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |message: String| CliError::Parse {
            path: origin.to_path_buf(),
            message,
        };
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| parse_err(e.message().to_string()))?;
        for key in MANIFEST_SECTIONS {
            table.remove(key);
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| parse_err(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_toml(&text, path)
    }

    pub fn template(&self) -> Result<Template> {
        Template::from_name(&self.template).map_or_else(
            || config_error(format!("template: unknown template '{}'", self.template)),
            Ok,
        )
    }

    pub fn init(&self) -> Result<InitScheme> {
        InitScheme::from_name(&self.init_scheme).map_or_else(
            || {
                config_error(format!(
                    "init_scheme: unknown scheme '{}'",
                    self.init_scheme
                ))
            },
            Ok,
        )
    }

    pub fn quench_spec(&self) -> Result<QuenchSpec> {
        let q = &self.quench;
        let trotter_order = TrotterOrder::from_int(q.trotter_order).map_err(|_| {
            CliError::Config(format!(
                "quench.trotter_order: expected 1 or 2, got {}",
                q.trotter_order
            ))
        })?;
        let spec = QuenchSpec {
            j: q.j,
            g0: q.g0,
            g1: q.g1,
            dt: q.dt,
            t_max: q.t_max,
            trotter_order,
        };
        spec.validate()
            .map_err(|e| CliError::Config(format!("quench: {e}")))?;
        Ok(spec)
    }

    pub fn schedule(&self) -> SpsaSchedule {
        let s = &self.spsa;
        SpsaSchedule {
            a: s.a,
            c: s.c,
            big_a: s.big_a.unwrap_or(0.1 * s.steps as f64),
            alpha: s.alpha,
            gamma: s.gamma,
            steps: s.steps,
        }
    }

    /// Options for seed `seed`; the config must be resolved.
    pub fn stochastic_options(&self, seed: u64) -> Result<StochasticOptions> {
        let mut o =
            StochasticOptions::new(self.init()?, self.spsa.steps, self.shots_per_eval, seed);
        o.schedule = self.schedule();
        o.bootstrap_factor = self.spsa.bootstrap_factor;
        o.calibrate_move = (self.spsa.calibrate_move > 0.0).then_some(self.spsa.calibrate_move);
        o.validate()
            .map_err(|e| CliError::Config(format!("spsa: {e}")))?;
        Ok(o)
    }

    pub fn seeds(&self) -> &[u64] {
        self.seeds.as_deref().unwrap_or(&[])
    }

    pub fn file_stem(&self) -> &str {
        self.name.as_deref().unwrap_or(self.kind.name())
    }

    /// Validates every field and fills in defaults. Nothing is computed
    /// before this succeeds.
    pub fn resolve(mut self) -> Result<Self> {
        self.quench_spec()?;
        let template = self.template()?;
        self.init()?;
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
                return config_error(format!("name: '{name}' is not a plain file stem"));
            }
        }
        if self.shots_per_eval == Some(0) {
            return config_error("shots_per_eval: must be positive (omit it for the exact cost)");
        }
        self.spsa.big_a = Some(self.schedule().big_a);
        self.schedule()
            .validate()
            .map_err(|e| CliError::Config(format!("spsa: {e}")))?;
        if !(self.spsa.calibrate_move >= 0.0 && self.spsa.calibrate_move.is_finite()) {
            return config_error("spsa.calibrate_move: must be finite and non-negative");
        }
        if self.spsa.bootstrap_factor == 0 {
            return config_error("spsa.bootstrap_factor: must be at least 1");
        }
        let seeds = match (self.seeds.take(), self.n_runs) {
            (Some(s), Some(n)) if s.len() != n => {
                return config_error(format!("seeds: {} seeds given but n_runs = {n}", s.len()));
            }
            (Some(s), _) => s,
            (None, Some(n)) => (0..n as u64).collect(),
            (None, None) => vec![0],
        };
        if seeds.is_empty() {
            return config_error("seeds: need at least one seed");
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return config_error("seeds: duplicate seeds");
        }
        self.n_runs = Some(seeds.len());
        self.seeds = Some(seeds);
        match self.kind {
            ExperimentKind::Ensemble if self.seeds().len() < 2 => {
                return config_error("n_runs: an ensemble needs at least two runs");
            }
            ExperimentKind::OracleCurve => {
                if self.oracle.k_points < 64 {
                    return config_error("oracle.k_points: need at least 64 momenta");
                }
                if !(2..=qmps_core::tfim::ED_MAX_SITES).contains(&self.oracle.ed_sites) {
                    return config_error(format!(
                        "oracle.ed_sites: must lie in 2..={}",
                        qmps_core::tfim::ED_MAX_SITES
                    ));
                }
            }
            ExperimentKind::TrotterStudy => {
                let r = self.trotter.reference_dt;
                if !(r > 0.0 && r <= self.quench.dt) {
                    return config_error(
                        "trotter.reference_dt: must be positive and at most quench.dt",
                    );
                }
                if self.quench.trotter_order != 2 {
                    return config_error("quench.trotter_order: a Trotter study evolves the second-order curve; set 2");
                }
            }
            ExperimentKind::GaugeAnalysis => {
                if template != Template::Reduced8 {
                    return config_error("template: gauge analysis needs reduced8");
                }
                if self.gauge.sweep_points == 0 {
                    return config_error("gauge.sweep_points: must be positive");
                }
            }
            _ => {}
        }
        if matches!(
            self.kind,
            ExperimentKind::Quench | ExperimentKind::Ensemble | ExperimentKind::GaugeAnalysis
        ) {
            self.stochastic_options(self.seeds()[0])?;
        }
        Ok(self)
    }

    pub fn to_toml_value(&self) -> toml::Value {
        // Every field is a plain number, string, path or list of these.
        toml::Value::try_from(self).expect("configuration serialises to TOML")
    }
}
