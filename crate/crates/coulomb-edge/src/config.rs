//! Run configuration: a JSON file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use coulomb_core::potential::PotentialSpec;

use crate::CliError;

/// On-disk configuration. Every command reads the same shape and uses the
/// fields it needs; command-line flags override file values.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub t_min: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub t_step: Option<f64>,
    /// Evaluation point for the `convergence` command.
    #[serde(default)]
    pub t0: Option<f64>,
    /// Explicit radii for the `density` command; a default grid over
    /// `[0, 1.5R]` is generated when absent.
    #[serde(default)]
    pub r_grid: Option<Vec<f64>>,
    /// Test-function labels for `fluct-check`: "1" or an even power "r^2k".
    #[serde(default)]
    pub f_list: Option<Vec<String>>,
    /// Expansion-window constant `M`.
    #[serde(default)]
    pub m: Option<f64>,
    /// Kernel truncation constant `C`; when set, `density` keeps only the
    /// `C·√(n log n)` highest basis terms.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Reserved for future sampling studies; no command reads it.
    #[allow(dead_code)]
    #[serde(default)]
    pub seed: u64,
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| CliError::Config(format!("cannot read config {}: {err}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|err| CliError::Config(format!("cannot parse config {}: {err}", path.display())))
}

/// Inclusive arithmetic grid `t_min, t_min + step, …, t_max`.
pub fn t_grid(t_min: f64, t_max: f64, t_step: f64) -> Result<Vec<f64>, CliError> {
    if !(t_step > 0.0) {
        return Err(CliError::Config(format!(
            "t_step must be positive, got {t_step}"
        )));
    }
    if t_max < t_min {
        return Err(CliError::Config(format!(
            "t_max = {t_max} is below t_min = {t_min}"
        )));
    }
    let count = ((t_max - t_min) / t_step).round() as usize;
    Ok((0..=count).map(|k| t_min + k as f64 * t_step).collect())
}
