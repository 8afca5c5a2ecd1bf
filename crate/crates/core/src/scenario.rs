//! Scenario configs for the command-line driver: TOML files selecting one
//! of the runnable experiment kinds plus its parameters. Parsing and
//! validation live here so the binary stays a thin formatter.

use std::collections::BTreeSet;

use crate::circuit::NoiseSpec;
use crate::error::{Error, Result};
use crate::fridge::{FridgeConfig, InitNoiseParams, NoiseModel, SimpleNoiseParams};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 0;

/// Guard rails against typo-sized runs; generous for every documented
/// scenario.
pub const MAX_SWEEP_POINTS: usize = 100_000;
pub const MAX_TRAJECTORY_POINTS: usize = 1_000_000;
pub const MAX_SHOTS: u64 = 100_000_000;
pub const MAX_CYCLES: u64 = 1_000_000;

/// A parsed config file: the scenario itself plus optional file-level
/// knobs. Command-line flags override both `seed` and `out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Sweep(SweepScenario),
    Trajectory(TrajectoryScenario),
    Histogram(HistogramScenario),
    NoiseCompare(NoiseCompareScenario),
    Verify,
    CycleMc(CycleMcScenario),
}

/// Branch temperatures and plus probability over a grid of input
/// temperatures, optionally with extra labelled noise-model columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepScenario {
    pub beta_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise: Vec<NoiseEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseEntry {
    pub label: String,
    #[serde(flatten)]
    pub model: NoiseModel,
}

/// The all-plus cooling trajectory, with the fixed point reported when
/// one exists in the standard bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryScenario {
    pub beta_start: f64,
    pub n_steps: usize,
    #[serde(default)]
    pub noise: NoiseModel,
}

/// Shot histogram of the 4-qubit SWITCH experiment for one computational
/// input of the three thermal qubits, noiseless and (optionally) noisy
/// side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramScenario {
    pub work: u8,
    pub res_a: u8,
    pub res_b: u8,
    pub shots: u64,
    /// Use the three-gate simplified SWITCH instead of the four-gate form.
    #[serde(default = "default_true")]
    pub simplified: bool,
    /// Replace the SWITCH with an empty circuit; every shot then lands on
    /// the prepared label, which pins down the bit-order conventions.
    #[serde(default)]
    pub identity_circuit: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
}

fn default_true() -> bool {
    true
}

/// Branch-temperature splitting at infinite input temperature for the two
/// analytic noise models; the output-mixing model shows none, faulty
/// initialization restores it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseCompareScenario {
    pub simple: SimpleNoiseParams,
    pub init: InitNoiseParams,
}

/// Monte-Carlo refrigeration cycles with per-cycle heat bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleMcScenario {
    pub beta_cold: f64,
    pub beta_hot: f64,
    pub n_cycles: u64,
    #[serde(default)]
    pub noise: NoiseModel,
}

impl CycleMcScenario {
    /// The fridge configuration this scenario runs, with the seed filled
    /// in by the caller.
    pub fn fridge_config(&self, seed: u64) -> FridgeConfig {
        FridgeConfig {
            beta_cold: self.beta_cold,
            beta_hot: self.beta_hot,
            noise: self.noise.clone(),
            seed,
        }
    }
}

impl Scenario {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Scenario::Sweep(_) => "sweep",
            Scenario::Trajectory(_) => "trajectory",
            Scenario::Histogram(_) => "histogram",
            Scenario::NoiseCompare(_) => "noise_compare",
            Scenario::Verify => "verify",
            Scenario::CycleMc(_) => "cycle_mc",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Scenario::Sweep(s) => {
                if s.beta_grid.is_empty() {
                    return Err(Error::InvalidScenario("beta_grid must be nonempty".into()));
                }
                if s.beta_grid.len() > MAX_SWEEP_POINTS {
                    return Err(Error::InvalidScenario(format!(
                        "beta_grid has {} points, limit is {MAX_SWEEP_POINTS}",
                        s.beta_grid.len()
                    )));
                }
                if s.beta_grid.iter().any(|b| b.is_nan()) {
                    return Err(Error::InvalidScenario("beta_grid contains NaN".into()));
                }
                let mut seen = BTreeSet::new();
                for entry in &s.noise {
                    validate_label(&entry.label)?;
                    if !seen.insert(entry.label.as_str()) {
                        return Err(Error::InvalidScenario(format!(
                            "duplicate noise label {:?}",
                            entry.label
                        )));
                    }
                    entry.model.validate()?;
                }
                Ok(())
            }
            Scenario::Trajectory(s) => {
                if s.beta_start.is_nan() {
                    return Err(Error::InvalidScenario("beta_start is NaN".into()));
                }
                if !s.beta_start.is_finite() {
                    return Err(Error::InvalidScenario(
                        "beta_start must be finite; the step map is undefined at zero temperature"
                            .into(),
                    ));
                }
                if s.n_steps > MAX_TRAJECTORY_POINTS {
                    return Err(Error::InvalidScenario(format!(
                        "n_steps {} exceeds the limit {MAX_TRAJECTORY_POINTS}",
                        s.n_steps
                    )));
                }
                s.noise.validate()
            }
            Scenario::Histogram(s) => {
                for (name, bit) in [("work", s.work), ("res_a", s.res_a), ("res_b", s.res_b)] {
                    if bit > 1 {
                        return Err(Error::InvalidScenario(format!(
                            "{name} must be 0 or 1, got {bit}"
                        )));
                    }
                }
                if s.shots == 0 {
                    return Err(Error::InvalidScenario("shots must be positive".into()));
                }
                if s.shots > MAX_SHOTS {
                    return Err(Error::InvalidScenario(format!(
                        "shots {} exceeds the limit {MAX_SHOTS}",
                        s.shots
                    )));
                }
                if let Some(spec) = &s.noise {
                    spec.validate()?;
                }
                Ok(())
            }
            Scenario::NoiseCompare(s) => {
                s.simple.validate()?;
                s.init.validate()
            }
            Scenario::Verify => Ok(()),
            Scenario::CycleMc(s) => {
                if s.n_cycles == 0 {
                    return Err(Error::InvalidScenario("n_cycles must be positive".into()));
                }
                if s.n_cycles > MAX_CYCLES {
                    return Err(Error::InvalidScenario(format!(
                        "n_cycles {} exceeds the limit {MAX_CYCLES}",
                        s.n_cycles
                    )));
                }
                s.fridge_config(0).validate()
            }
        }
    }
}

fn validate_label(label: &str) -> Result<()> {
    let ok = !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidScenario(format!(
            "noise label {label:?} must be nonempty [A-Za-z0-9_-]"
        )))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()
    }

    /// Resolved seed: command-line flag wins, then the file, then 0.
    pub fn resolve_seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(DEFAULT_SEED)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| Error::InvalidScenario(format!("config serialization failed: {e}")))
    }
}

/// Parses and validates a scenario config from TOML text.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig =
        toml::from_str(text).map_err(|e| Error::InvalidScenario(format!("bad config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}
