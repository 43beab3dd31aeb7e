//! JSON experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamic::{online_lasso, OnlineConfig, TruthSegment};
use crate::error::{Error, Result};
use crate::metrics::DEFAULT_SUPPORT_TAU;
use crate::recovery::LassoConfig;
use crate::scenario::{
    build_scenario, random_power_vector, GridSpec, Scenario, DEFAULT_AREA_EXTENT,
};
use crate::seed::{derive_seed, rng_from_seed};

/// Purpose tags for the per-trial random streams.
pub const SCENARIO_STREAM: &str = "scenario";
pub const MEASUREMENT_STREAM: &str = "measurement";
pub const SELECTION_STREAM: &str = "selection";
pub const TRUTH_STREAM: &str = "truth-schedule";
pub const ONLINE_STREAM: &str = "online";

/// Static selection strategies available to the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StaticMethod {
    EOptimal,
    DOptimal,
    Random,
    Oracle,
}

impl StaticMethod {
    pub const ALL: [StaticMethod; 4] = [
        StaticMethod::EOptimal,
        StaticMethod::DOptimal,
        StaticMethod::Random,
        StaticMethod::Oracle,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            StaticMethod::EOptimal => "e-optimal",
            StaticMethod::DOptimal => "d-optimal",
            StaticMethod::Random => "random",
            StaticMethod::Oracle => "oracle",
        }
    }
}

impl fmt::Display for StaticMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for StaticMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StaticMethod::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = StaticMethod::ALL.iter().map(|m| m.tag()).collect();
                Error::Config(format!(
                    "unknown method '{s}'; valid methods are {}",
                    valid.join(", ")
                ))
            })
    }
}

impl TryFrom<String> for StaticMethod {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StaticMethod> for String {
    fn from(m: StaticMethod) -> String {
        m.tag().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    pub side_count: usize,
    #[serde(default = "default_extent")]
    pub area_extent: f64,
    pub sensor_count: usize,
    pub sparsity: usize,
    /// `None` gives noiseless measurements.
    #[serde(default)]
    pub snr_db: Option<f64>,
}

fn default_extent() -> f64 {
    DEFAULT_AREA_EXTENT
}

impl ScenarioParams {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.side_count, self.area_extent)
    }

    /// Scenario for one trial.
    pub fn build(&self, seed: u64) -> Result<Scenario> {
        let mut sc = build_scenario(
            self.grid()?,
            self.sensor_count,
            self.sparsity,
            self.snr_db.unwrap_or(0.0),
            seed,
        )?;
        if self.snr_db.is_none() {
            sc.noise_std = 0.0;
        }
        Ok(sc)
    }
}

/// Either an explicit list of `K` values or an inclusive stepped range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KValues {
    List(Vec<usize>),
    Range {
        start: usize,
        end: usize,
        step: usize,
    },
}

impl KValues {
    pub fn values(&self) -> Result<Vec<usize>> {
        match self {
            KValues::List(v) => Ok(v.clone()),
            KValues::Range { start, end, step } => {
                if *step == 0 {
                    return Err(Error::Config("K range step must be positive".into()));
                }
                Ok((*start..=*end).step_by(*step).collect())
            }
        }
    }
}

/// True power states of a dynamic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthScheduleConfig {
    /// First block of every state after the initial one.
    pub transitions: Vec<usize>,
    /// Explicit power vectors, one per state. When absent every state after
    /// the first is a fresh random draw with the scenario's sparsity.
    #[serde(default)]
    pub states: Option<Vec<Vec<f64>>>,
}

impl TruthScheduleConfig {
    /// Tiles `0..blocks` with one segment per state. Random states are drawn
    /// from `seed`; the first random state is the scenario's own truth.
    pub fn segments(&self, sc: &Scenario, blocks: usize, seed: u64) -> Result<Vec<TruthSegment>> {
        let n = sc.point_count();
        let mut bounds = vec![0];
        for &t in &self.transitions {
            if t <= *bounds.last().unwrap() || t >= blocks {
                return Err(Error::Config(format!(
                    "transitions must increase strictly within 1..{blocks}; got {:?}",
                    self.transitions
                )));
            }
            bounds.push(t);
        }
        bounds.push(blocks);
        let count = bounds.len() - 1;
        let powers = match &self.states {
            Some(states) => {
                if states.len() != count {
                    return Err(Error::Config(format!(
                        "{} transitions need {count} states, got {}",
                        self.transitions.len(),
                        states.len()
                    )));
                }
                if states.iter().any(|s| s.len() != n) {
                    return Err(Error::Config(format!("every state needs {n} entries")));
                }
                states.clone()
            }
            None => {
                let mut rng = rng_from_seed(seed);
                let mut out = vec![sc.true_power.clone()];
                for _ in 1..count {
                    out.push(random_power_vector(&mut rng, n, sc.sparsity));
                }
                out
            }
        };
        Ok(bounds
            .windows(2)
            .zip(powers)
            .map(|(w, power)| TruthSegment {
                start: w[0],
                end: w[1],
                power,
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicParams {
    pub online: OnlineConfig,
    pub schedule: TruthScheduleConfig,
    /// γ values to run. The γ = 0 baseline is always added.
    #[serde(default)]
    pub gammas: Vec<f64>,
    /// Length of the error window opened by each transition.
    #[serde(default = "default_window")]
    pub post_transition_window: usize,
    /// Blocks at which reliability maps are written (first trial only).
    #[serde(default)]
    pub raster_blocks: Vec<usize>,
    #[serde(default = "default_resolution")]
    pub raster_resolution: usize,
}

fn default_window() -> usize {
    10
}

fn default_resolution() -> usize {
    32
}

impl DynamicParams {
    /// Sorted, deduplicated γ values including 0 and `online.gamma`.
    pub fn gamma_values(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.gammas.clone();
        g.push(0.0);
        if self.gammas.is_empty() {
            g.push(self.online.gamma);
        }
        g.sort_by(|a, b| a.total_cmp(b));
        g.dedup();
        g
    }
}

/// Settings for the matrix diagnostics report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagParams {
    /// RIP orders to enumerate.
    pub rip_orders: Vec<usize>,
    /// Trial whose scenario is diagnosed.
    pub trial: usize,
}

impl Default for DiagParams {
    fn default() -> Self {
        DiagParams {
            rip_orders: vec![1, 2, 3],
            trial: 0,
        }
    }
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioParams,
    #[serde(default = "default_methods")]
    pub methods: Vec<StaticMethod>,
    pub k_values: KValues,
    pub trials: usize,
    #[serde(default)]
    pub lasso: LassoConfig,
    #[serde(default = "default_tau")]
    pub support_tau: f64,
    #[serde(default)]
    pub dynamic: Option<DynamicParams>,
    #[serde(default)]
    pub diag: DiagParams,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Record wall-clock time per trial. Off by default so that output
    /// bytes depend only on the configuration.
    #[serde(default)]
    pub timing: bool,
}

fn default_methods() -> Vec<StaticMethod> {
    vec![
        StaticMethod::EOptimal,
        StaticMethod::DOptimal,
        StaticMethod::Random,
    ]
}

fn default_tau() -> f64 {
    DEFAULT_SUPPORT_TAU
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ExperimentConfig {
    /// Desk-scale setup: 6×6 grid, 100 sensors, five unit-power
    /// transmitters at 20 dB, 100 trials and a 90-block dynamic run with
    /// state changes at blocks 24 and 59.
    fn default() -> Self {
        ExperimentConfig {
            scenario: ScenarioParams {
                side_count: 6,
                area_extent: DEFAULT_AREA_EXTENT,
                sensor_count: 100,
                sparsity: 5,
                snr_db: Some(20.0),
            },
            methods: default_methods(),
            k_values: KValues::Range {
                start: 10,
                end: 40,
                step: 5,
            },
            trials: 100,
            lasso: LassoConfig::default(),
            support_tau: DEFAULT_SUPPORT_TAU,
            dynamic: Some(DynamicParams {
                online: OnlineConfig {
                    k: 8,
                    low_rate_denominator: 30,
                    gamma: 0.7,
                    blocks: 90,
                    forgetting: 0.1,
                    lasso: online_lasso(),
                    seed: 0,
                },
                schedule: TruthScheduleConfig {
                    transitions: vec![24, 59],
                    states: None,
                },
                gammas: vec![0.0, 0.35, 0.7, 1.4],
                post_transition_window: 10,
                raster_blocks: vec![0, 23, 58, 89],
                raster_resolution: 32,
            }),
            diag: DiagParams::default(),
            output_dir: default_output_dir(),
            seed: 0,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn k_list(&self) -> Result<Vec<usize>> {
        self.k_values.values()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.scenario.sensor_count;
        self.scenario
            .grid()
            .map_err(|e| Error::Config(e.to_string()))?;
        if m == 0 {
            return Err(Error::Config("sensor_count must be at least 1".into()));
        }
        if self.scenario.sparsity > self.scenario.side_count.pow(2) {
            return Err(Error::Config(
                "sparsity exceeds the number of grid points".into(),
            ));
        }
        if matches!(self.scenario.snr_db, Some(v) if !v.is_finite()) {
            return Err(Error::Config("snr_db must be finite".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let ks = self.k_list()?;
        if ks.is_empty() {
            return Err(Error::Config("no K values given".into()));
        }
        if let Some(k) = ks.iter().find(|&&k| k == 0 || k > m) {
            return Err(Error::Config(format!("K = {k} lies outside 1..={m}")));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods given".into()));
        }
        if !(self.support_tau > 0.0 && self.support_tau < 1.0) {
            return Err(Error::Config("support_tau must lie in (0, 1)".into()));
        }
        self.lasso
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let n = self.scenario.side_count.pow(2);
        if let Some(s) = self.diag.rip_orders.iter().find(|&&s| s == 0 || s > n) {
            return Err(Error::Config(format!("RIP order {s} lies outside 1..={n}")));
        }
        if let Some(d) = &self.dynamic {
            d.online
                .validate(m)
                .map_err(|e| Error::Config(e.to_string()))?;
            if d.gammas.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
                return Err(Error::Config("gammas must be nonnegative".into()));
            }
            if d.raster_resolution < 2 {
                return Err(Error::Config("raster_resolution must be at least 2".into()));
            }
            if let Some(b) = d.raster_blocks.iter().find(|&&b| b >= d.online.blocks) {
                return Err(Error::Config(format!(
                    "raster block {b} is past the last block"
                )));
            }
        }
        Ok(())
    }

    /// Child seed for `(trial, purpose)`.
    pub fn trial_seed(&self, trial: usize, purpose: &str) -> u64 {
        derive_seed(self.seed, trial as u64, 0, purpose)
    }

    pub fn dynamic_params(&self) -> Result<&DynamicParams> {
        self.dynamic
            .as_ref()
            .ok_or_else(|| Error::Config("the configuration has no dynamic block".into()))
    }
}
