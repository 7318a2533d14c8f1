//! JSON configuration files, one type per command.

use std::path::{Path, PathBuf};

use energy_shield::analysis::Setting;
use energy_shield::exactdp::DpOptions;
use energy_shield::{EnergyFunction, EnvModel, FairnessTarget, Measure, ShieldSpec, SynthesisInstance};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub setting: Setting,
    pub zeta: EnergyFunction,
    pub target: FairnessTarget,
    /// Group-count failure probability; required for two groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Times at which the tail bound is tabulated.
    #[serde(default = "default_times")]
    pub times: Vec<u64>,
}

pub fn default_times() -> Vec<u64> {
    vec![100, 1_000, 3_200, 10_000, 32_000, 100_000]
}

pub type SynthesizeConfig = SynthesisInstance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub env: EnvModel,
    /// A single shield; use `shields` for several on common random numbers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shield: Option<ShieldSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shields: Vec<ShieldSpec>,
    pub horizon: u64,
    pub runs: u64,
    #[serde(default)]
    pub seed: u64,
    pub target: FairnessTarget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_limit: Option<u64>,
    /// Columns of the per-time CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
}

impl SimulateConfig {
    pub fn shields(&self) -> Result<Vec<ShieldSpec>, CliError> {
        let mut all: Vec<ShieldSpec> = self.shield.iter().copied().collect();
        all.extend(self.shields.iter().copied());
        if all.is_empty() {
            return Err(CliError::Config("simulate: give 'shield' or 'shields'".into()));
        }
        Ok(all)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpConfig {
    pub setting: Setting,
    pub zeta: EnergyFunction,
    pub target: FairnessTarget,
    pub horizon: u64,
    pub measure: Measure,
    #[serde(default)]
    pub options: DpOptions,
    /// Also write the backward value table (single group only).
    #[serde(default)]
    pub table: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayConfig {
    pub shield: ShieldSpec,
    /// CSV of raw decisions, relative to the config file.
    pub input: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

/// Reads and parses a config, reporting the failing field path.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let at = if at == "." { String::new() } else { format!(" at '{at}'") };
        CliError::Config(format!("invalid config{at}: {}", e.into_inner()))
    })
}
