//! Run manifest: tool version, timestamps, produced files and the fully
//! resolved configuration. The `config` table is itself a valid config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub output_files: Vec<PathBuf>,
    pub config: ConfigFile,
}

impl RunManifest {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::validation(format!("manifest encoding: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::write_file(path, self.to_toml()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {}", path.display(), e.message())))
    }
}

/// `results/run.csv` → `results/run.manifest.toml`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.toml")
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
