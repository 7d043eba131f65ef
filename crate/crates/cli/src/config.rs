//! TOML run configuration. Every key is optional; command-line flags win
//! over file values, and unknown keys are an error.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::io::read_text;

/// Keys every command accepts.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Common {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitFile {
    #[serde(flatten)]
    pub common: Common,
    pub k: Option<usize>,
    pub kind: Option<String>,
    pub beta: Option<f64>,
    pub eps_tau: Option<f64>,
    pub max_iters: Option<usize>,
    pub reg_floor: Option<f64>,
    pub init: Option<String>,
    pub init_rounds: Option<usize>,
    pub init_restarts: Option<usize>,
    pub init_burn_iters: Option<usize>,
    pub estimator: Option<String>,
    /// Dirichlet concentration shared by every component.
    pub map_alpha: Option<f64>,
    pub map_iota0: Option<f64>,
    pub map_nu0: Option<f64>,
    pub stopping: Option<String>,
    pub delta_theta: Option<f64>,
    pub delta_mu: Option<f64>,
    pub sigma_floor: Option<f64>,
    pub kappa_cap: Option<f64>,
    pub trunc_sigma: Option<f64>,
    pub noise_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    #[serde(flatten)]
    pub common: Common,
    pub include_v_prime: Option<bool>,
    pub v_prime_budget: Option<usize>,
    pub kappa_threshold: Option<f64>,
    pub logdet_eps: Option<f64>,
    pub logdet_delta: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostFile {
    #[serde(flatten)]
    pub common: Common,
    pub delta_theta: Option<f64>,
    pub delta_mu: Option<f64>,
    pub eps_tau: Option<f64>,
    pub n: Option<usize>,
    pub estimator: Option<String>,
    pub reduction: Option<String>,
    pub kappa_v_power: Option<String>,
    /// Sample counts for `curves.csv`; log-spaced when absent.
    pub curve_points: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFile {
    #[serde(flatten)]
    pub common: Common,
    pub k: Option<usize>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub separation: Option<f64>,
    pub sigma: Option<f64>,
    pub kind: Option<String>,
    pub beta: Option<f64>,
}

/// Parse a TOML file into `T`, or `T::default()` without a path.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => parse(p, &read_text(p)?),
    }
}

pub fn parse<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    toml::from_str(text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Split a validate config into the common keys and the suite table.
/// Suite parameters sit at the top level next to `seed`.
pub fn split_suite_config(path: &Path, text: &str) -> CliResult<(Common, toml::Table)> {
    let mut table: toml::Table = parse(path, text)?;
    let mut common = Common::default();
    if let Some(v) = table.remove("seed") {
        common.seed = Some(v.try_into().map_err(|e| CliError::config(format!("{}: seed: {e}", path.display())))?);
    }
    if let Some(v) = table.remove("output_dir") {
        common.output_dir =
            Some(v.try_into().map_err(|e| CliError::config(format!("{}: output_dir: {e}", path.display())))?);
    }
    Ok((common, table))
}

/// First present value, flag before file.
pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn require<T>(value: Option<T>, name: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::config(format!("missing required value '{name}' (flag or config key)")))
}
