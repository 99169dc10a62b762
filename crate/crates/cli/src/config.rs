//! JSON config file. Keys are the long flag names; a flag given on the
//! command line wins over the file.

use std::path::{Path, PathBuf};

use betapoly::Objective;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub beta: Option<f64>,
    pub count: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub n: Option<usize>,
    pub objective: Option<Objective>,
    pub kernel: Option<Objective>,
    #[serde(alias = "brute-force")]
    pub brute_force: Option<bool>,
    pub json: Option<bool>,
    pub step: Option<f64>,
    pub richardson: Option<bool>,
    #[serde(rename = "N")]
    pub sample_sizes: Option<Vec<usize>>,
    pub trials: Option<usize>,
    #[serde(alias = "out-dir")]
    pub out_dir: Option<PathBuf>,
    pub delta: Option<f64>,
    #[serde(alias = "fit-window")]
    pub fit_window: Option<Vec<f64>>,
    pub timing: Option<bool>,
    pub eps: Option<Vec<f64>>,
    pub draws: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Validation(format!("invalid config {}: {e}", path.display()))
        })
    }
}

/// Flag value, else file value, else a missing-flag error.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(file)
        .ok_or_else(|| CliError::Validation(format!("missing required flag --{name}")))
}

/// Boolean switches: set by either source.
pub fn switch(flag: bool, file: Option<bool>) -> bool {
    flag || file.unwrap_or(false)
}
