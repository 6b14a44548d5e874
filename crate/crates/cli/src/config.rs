//! The run configuration document. Every section is optional; unknown keys are
//! rejected at every level.

use std::path::{Path, PathBuf};

use hazrank_core::figure::FigureSpec;
use hazrank_core::{CrossingConfig, FitConfig, SimSpec, TieMethod};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "HAZRANK_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub simulate: Option<SimSpec>,
    #[serde(default)]
    pub fit: Option<FitSection>,
    #[serde(default)]
    pub diagnose: Option<DiagnoseSection>,
    #[serde(default)]
    pub figure: Option<FigureSpec>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cox,
    Pl,
    Dpo,
}

/// Model choice plus optimizer settings. Unset optimizer fields keep the
/// library defaults: tol 1e-8, step_tol 1e-6, max_iter 100, ridge_lambda 0,
/// beta_cap 30, line_search_shrink 0.5, min_step 1e-10.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub model: Option<ModelKind>,
    pub ties: Option<TieMethod>,
    /// DPO temperature (default 1).
    pub beta_temp: Option<f64>,
    /// DPO reference logits (default uniform over the responses in the file).
    pub reference_logits: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub step_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub ridge_lambda: Option<f64>,
    pub beta_cap: Option<f64>,
    pub line_search_shrink: Option<f64>,
    pub min_step: Option<f64>,
}

impl FitSection {
    pub fn fit_config(&self) -> FitConfig<f64> {
        let d = FitConfig::<f64>::default();
        FitConfig {
            tol: self.tol.unwrap_or(d.tol),
            step_tol: self.step_tol.unwrap_or(d.step_tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            ridge_lambda: self.ridge_lambda.unwrap_or(d.ridge_lambda),
            beta_cap: self.beta_cap.unwrap_or(d.beta_cap),
            line_search_shrink: self.line_search_shrink.unwrap_or(d.line_search_shrink),
            min_step: self.min_step.unwrap_or(d.min_step),
        }
    }
}

/// Diagnostic thresholds: epsilon 0.01, min_n 200, z_crit 2.58 by default.
/// `seeds` drives the seed sweep of the `probe` command (default 0..20).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSection {
    pub epsilon: Option<f64>,
    pub min_n: Option<usize>,
    pub z_crit: Option<f64>,
    pub seeds: Option<Vec<u64>>,
}

impl DiagnoseSection {
    pub fn crossing(&self) -> CrossingConfig {
        let d = CrossingConfig::default();
        CrossingConfig { epsilon: self.epsilon.unwrap_or(d.epsilon), min_n: self.min_n.unwrap_or(d.min_n) }
    }

    pub fn z_crit(&self) -> f64 {
        self.z_crit.unwrap_or(hazrank_core::diagnose::DEFAULT_Z_CRIT)
    }
}

/// Default destinations used when the matching command-line flag is absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Main output (dataset, report or curve table).
    pub out: Option<PathBuf>,
    /// Secondary curve table of the `figure` command.
    pub hazard_out: Option<PathBuf>,
    /// Pair comparison report of the `figure` command.
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    raw: serde_json::Value,
    /// Hex SHA-256 of the canonical JSON serialization of `config`.
    pub hash: String,
}

impl LoadedConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let raw = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => serde_json::json!({}),
        };
        let config: RunConfig = serde_json::from_value(raw.clone())
            .map_err(|e| CliError::Config(format!("{}: {e}", describe(path))))?;
        let hash = hash_config(&config);
        Ok(Self { config, raw, hash })
    }

    /// Whether `section.key` was written in the file.
    pub fn has_key(&self, section: &str, key: &str) -> bool {
        self.raw.get(section).and_then(|s| s.get(key)).is_some()
    }

    pub fn output(&self) -> OutputSection {
        self.config.output.clone().unwrap_or_default()
    }

    pub fn fit(&self) -> FitSection {
        self.config.fit.clone().unwrap_or_default()
    }

    pub fn diagnose(&self) -> DiagnoseSection {
        self.config.diagnose.clone().unwrap_or_default()
    }
}

fn describe(path: Option<&Path>) -> String {
    path.map_or_else(|| "<defaults>".to_string(), |p| p.display().to_string())
}

pub fn hash_config(config: &RunConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(canonical))
}

/// Seed precedence: command-line flag, then a seed written in the config
/// file, then the `HAZRANK_SEED` environment variable, then `fallback`.
pub fn resolve_seed(flag: Option<u64>, from_config: Option<u64>, fallback: u64) -> CliResult<u64> {
    if let Some(s) = flag.or(from_config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(fallback),
    }
}
