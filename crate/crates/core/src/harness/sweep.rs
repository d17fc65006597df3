//! Batches of independent experiments sharing a base configuration.

use super::config::{ConfigOverrides, ExperimentConfig};
use super::experiments::{run, Summary};
use super::io::write_outputs;
use crate::error::{Error, Result};
use crate::par::par_map;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRun {
    pub name: String,
    #[serde(default)]
    pub config: ConfigOverrides,
}

/// A sweep file: `{"base": {...}, "runs": [{"name": ..., "config": {...}}]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: ConfigOverrides,
    pub runs: Vec<SweepRun>,
}

impl SweepSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Resolves every run with `extra` layered on top, failing on the first
    /// invalid one or on repeated names.
    pub fn configs(&self, extra: &[ConfigOverrides]) -> Result<Vec<(String, ExperimentConfig)>> {
        let mut seen = std::collections::HashSet::new();
        self.runs
            .iter()
            .map(|r| {
                let name_ok = !r.name.is_empty()
                    && r.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
                if !name_ok || !seen.insert(r.name.clone()) {
                    return Err(Error::InvalidParameter(format!(
                        "sweep run names must be unique and file-safe, got `{}`",
                        r.name
                    )));
                }
                let mut layers = vec![self.base.clone(), r.config.clone()];
                layers.extend_from_slice(extra);
                Ok((r.name.clone(), ExperimentConfig::from_layers(&layers)?))
            })
            .collect()
    }
}

#[derive(Debug)]
pub struct SweepResult {
    pub name: String,
    pub outcome: Result<Summary>,
}

/// Runs all configurations concurrently. With `out_dir`, each run writes
/// `<out_dir>/<name>.csv` and its summary; files are never shared.
pub fn run_sweep(configs: &[(String, ExperimentConfig)], out_dir: Option<&Path>) -> Vec<SweepResult> {
    par_map(configs, |(name, cfg)| {
        let outcome = run(cfg).and_then(|out| {
            if let Some(dir) = out_dir {
                write_outputs(&dir.join(format!("{name}.csv")), &out)?;
            }
            Ok(out.summary)
        });
        SweepResult {
            name: name.clone(),
            outcome,
        }
    })
}
