//! Command-line front end of the sparse adaptive channel estimation simulator:
//! configuration, CSV and SVG output, run manifests and the `run`,
//! `reproduce` and `validate` commands.

pub mod commands;
pub mod config;
pub mod csv_table;
pub mod error;
pub mod manifest;
pub mod svg;

use std::path::Path;

pub use error::{CliError, Result};

/// Writes `bytes` to `path`, creating parent directories.
pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
