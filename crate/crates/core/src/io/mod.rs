// SPDX-License-Identifier: Apache-2.0

//! Config parsing, CSV and JSON output, run provenance and the calibration cache.

mod cache;
mod config;
mod manifest;
mod series;

pub use cache::{parse_calibration_cache, CacheFile, CalibrationCache};
pub use config::{load_config, parse_config, to_toml};
pub use manifest::{config_hash, create_run_dir, RunManifest, Tolerances};
pub use series::{read_series, write_json, write_series, write_table, SERIES_HEADER};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io("creating temporary file in", dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io("writing", path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io("syncing", path, e))?;
    tmp.persist(path).map_err(|e| Error::io("replacing", path, e.error))?;
    Ok(())
}
