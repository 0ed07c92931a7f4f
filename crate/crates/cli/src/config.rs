//! Experiment configuration files: JSON with the distribution literals of
//! the core crate. Unknown keys anywhere are errors.

use std::path::PathBuf;

use serde::Deserialize;
use serde_json::Value;

use universim_core::distributions::{DistributionSpec, ScalarDistribution};
use universim_core::typeclass::MarkovChainSpec;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SawtoothSweep,
    QuantizedSeed,
    TypeDecay,
    MarkovDecay,
    SqueezeSweep,
    CltBaseline,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SawtoothSweep => "sawtooth_sweep",
            Self::QuantizedSeed => "quantized_seed",
            Self::TypeDecay => "type_decay",
            Self::MarkovDecay => "markov_decay",
            Self::SqueezeSweep => "squeeze_sweep",
            Self::CltBaseline => "clt_baseline",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovLiteral {
    pub states: usize,
    pub order: usize,
    pub initial: Vec<u8>,
    pub transitions: Vec<Vec<f64>>,
}

/// Raw config as written on disk. Distribution literals stay as JSON
/// values so the fail-closed literal parser can validate them.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed_distribution: Option<Value>,
    #[serde(default)]
    pub target_distribution: Option<Value>,
    #[serde(default)]
    pub delta_grid: Vec<f64>,
    #[serde(default)]
    pub n_grid: Vec<u64>,
    #[serde(default = "default_rng_seed")]
    pub rng_seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub markov: Option<MarkovLiteral>,
    #[serde(default)]
    pub quantize_n: Option<u64>,
    #[serde(default)]
    pub renyi_alphas: Option<Vec<f64>>,
}

fn default_rng_seed() -> u64 {
    7_040_209_913_374_210_817
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn seed(&self) -> Result<ScalarDistribution, CliError> {
        let value = self
            .seed_distribution
            .as_ref()
            .ok_or_else(|| CliError::Config("missing field \"seed_distribution\"".into()))?;
        build_literal(value, "seed_distribution")
    }

    /// Target law; the unit uniform when omitted.
    pub fn target(&self) -> Result<ScalarDistribution, CliError> {
        match &self.target_distribution {
            None => Ok(ScalarDistribution::uniform(0.0, 1.0).expect("static parameters")),
            Some(value) => build_literal(value, "target_distribution"),
        }
    }

    pub fn delta_grid(&self) -> Result<&[f64], CliError> {
        if self.delta_grid.is_empty() {
            return Err(CliError::Config("field \"delta_grid\" must be non-empty".into()));
        }
        if self.delta_grid.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(CliError::Config(
                "field \"delta_grid\" entries must be positive".into(),
            ));
        }
        Ok(&self.delta_grid)
    }

    pub fn n_grid(&self) -> Result<&[u64], CliError> {
        if self.n_grid.is_empty() {
            return Err(CliError::Config("field \"n_grid\" must be non-empty".into()));
        }
        if self.n_grid.contains(&0) {
            return Err(CliError::Config("field \"n_grid\" entries must be positive".into()));
        }
        Ok(&self.n_grid)
    }

    pub fn markov_spec(&self) -> Result<MarkovChainSpec, CliError> {
        let lit = self
            .markov
            .as_ref()
            .ok_or_else(|| CliError::Config("missing field \"markov\"".into()))?;
        MarkovChainSpec::new(
            lit.states,
            lit.order,
            lit.initial.clone(),
            lit.transitions.clone(),
        )
        .map_err(|e| CliError::Config(format!("field \"markov\": {e}")))
    }
}

fn build_literal(value: &Value, field: &str) -> Result<ScalarDistribution, CliError> {
    let spec = DistributionSpec::from_value(value)
        .map_err(|e| CliError::Config(format!("field \"{field}\": {e}")))?;
    spec.build()
        .map_err(|e| CliError::Config(format!("field \"{field}\": {e}")))
}
