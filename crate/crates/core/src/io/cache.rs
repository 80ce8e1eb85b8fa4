// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::decoherence::{calibrate_zeta, Calibration};
use crate::error::{Error, Result};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// On-disk calibration cache, keyed by `(Q, M, Λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheFile {
    pub tool_version: String,
    #[serde(default)]
    pub entries: Vec<Calibration>,
}

impl CacheFile {
    fn empty() -> Self {
        CacheFile { tool_version: TOOL_VERSION.to_string(), entries: Vec::new() }
    }

    pub fn find(&self, q_factor: f64, modes: usize, cutoff: f64) -> Option<Calibration> {
        self.entries.iter().find(|c| c.q_factor == q_factor && c.modes == modes && c.cutoff == cutoff).copied()
    }
}

pub fn parse_calibration_cache(text: &str) -> Result<CacheFile> {
    let file: CacheFile =
        toml::from_str(text).map_err(|e| Error::Parse { what: "calibration cache", message: e.to_string() })?;
    for c in &file.entries {
        if !(c.zeta >= 0.0 && c.zeta.is_finite() && c.q_factor > 0.0 && c.cutoff > 0.0) {
            return Err(Error::Parse { what: "calibration cache", message: format!("invalid entry {c:?}") });
        }
    }
    Ok(file)
}

#[derive(Debug, Clone)]
pub struct CalibrationCache {
    path: PathBuf,
}

impl CalibrationCache {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        CalibrationCache { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Current contents. Missing files, unreadable files and files written by
    /// another tool version all count as empty.
    pub fn load(&self) -> CacheFile {
        std::fs::read_to_string(&self.path)
            .ok()
            .and_then(|text| parse_calibration_cache(&text).ok())
            .filter(|f| f.tool_version == TOOL_VERSION)
            .unwrap_or_else(CacheFile::empty)
    }

    pub fn get_or_calibrate(&self, q_factor: f64, modes: usize, cutoff: f64) -> Result<Calibration> {
        let mut file = self.load();
        if let Some(hit) = file.find(q_factor, modes, cutoff) {
            return Ok(hit);
        }
        let cal = calibrate_zeta(q_factor, modes, cutoff)?;
        if q_factor.is_finite() {
            file.entries.push(cal);
            if let Some(dir) = self.path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io("creating cache directory", dir, e))?;
            }
            let text = toml::to_string(&file)
                .map_err(|e| Error::Parse { what: "calibration cache", message: e.to_string() })?;
            write_atomic(&self.path, text.as_bytes())?;
        }
        Ok(cal)
    }
}
