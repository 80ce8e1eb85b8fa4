// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::PURITY_DRIFT_TOL;
use crate::error::{Error, Result};
use crate::experiments::{ScenarioConfig, ONSET_EPS, WITNESS_SLACK};
use crate::gaussian::VALIDITY_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub validity: f64,
    pub onset_eps: f64,
    pub witness_slack: f64,
    pub purity_drift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            validity: VALIDITY_TOL,
            onset_eps: ONSET_EPS,
            witness_slack: WITNESS_SLACK,
            purity_drift: PURITY_DRIFT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub tolerances: Tolerances,
    pub started_at: String,
    pub finished_at: String,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn start(config: &ScenarioConfig) -> Result<RunManifest> {
        Ok(RunManifest {
            config_hash: config_hash(config)?,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            tolerances: Tolerances::default(),
            started_at: now(),
            finished_at: String::new(),
            files: Vec::new(),
        })
    }

    pub fn finish(&mut self, files: Vec<String>) {
        self.finished_at = now();
        self.files = files;
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// SHA-256 of the key-sorted JSON form of every physics field.
///
/// The `[output]` section is excluded, so changing the output directory or the
/// reporting base does not change the hash.
pub fn config_hash(config: &ScenarioConfig) -> Result<String> {
    let mut value =
        serde_json::to_value(config).map_err(|e| Error::Parse { what: "config", message: e.to_string() })?;
    if let Some(map) = value.as_object_mut() {
        map.remove("output");
    }
    // serde_json's map is ordered by key, so this is already canonical.
    let canonical =
        serde_json::to_string(&value).map_err(|e| Error::Parse { what: "config", message: e.to_string() })?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes()).as_slice()))
}

/// Creates `<out>/<hash8>-<UTC timestamp>`, adding a numeric suffix on collision.
pub fn create_run_dir(out: &Path, hash: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(out).map_err(|e| Error::io("creating output directory", out, e))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let prefix = &hash[..hash.len().min(8)];
    for n in 0..1000 {
        let name = if n == 0 { format!("{prefix}-{stamp}") } else { format!("{prefix}-{stamp}-{n}") };
        let dir = out.join(name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(Error::io("creating run directory", dir, e)),
        }
    }
    Err(Error::io(
        "creating run directory",
        out,
        std::io::Error::new(std::io::ErrorKind::AlreadyExists, "too many runs with the same timestamp"),
    ))
}
