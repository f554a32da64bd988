use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use ncmoment::ToleranceConfig;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub tolerances: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Effective settings after merging defaults, the config file and flags.
#[derive(Debug, Clone)]
pub struct GlobalConfig {
    pub tolerances: ToleranceConfig,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

impl GlobalConfig {
    /// Command-line values win over the file, which wins over defaults.
    pub fn resolve(
        file: Option<FileConfig>,
        seed: Option<u64>,
        output: Option<PathBuf>,
        format: Option<Format>,
    ) -> Result<Self, CliError> {
        let file = file.unwrap_or_default();
        let tolerances = ToleranceConfig::default()
            .with_overrides(file.tolerances.iter().map(|(k, v)| (k.as_str(), *v)))
            .map_err(|e| CliError::Usage(format!("config: {e}")))?;
        Ok(Self {
            tolerances,
            seed: seed.or(file.seed).unwrap_or(0),
            output: output.or(file.output),
            format: format.or(file.format).unwrap_or(Format::Json),
        })
    }
}
