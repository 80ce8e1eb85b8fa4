// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::ScenarioConfig;

/// Parses and validates a TOML scenario document.
///
/// Syntax errors, unknown or missing keys and out-of-range values are all
/// reported as [`Error::Config`] with the dotted path of the offending field.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let de = toml::Deserializer::parse(text)
        .map_err(|e| Error::Config { path: "<document>".into(), message: e.to_string().trim().to_string() })?;
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().message().trim().to_string();
        Error::Config { path: if path == "." { "<document>".into() } else { path }, message }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io("reading config", path, e))?;
    parse_config(&text)
}

pub fn to_toml(config: &ScenarioConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::Parse { what: "config", message: e.to_string() })
}
