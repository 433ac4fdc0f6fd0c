//! Config ingestion from a preset name or a JSON file.

use std::fs;
use std::path::Path;

use eit_core::{presets, validate_config, Error, SystemConfig};

use crate::CliError;

/// A config file holds either a bare [`SystemConfig`] object or a preset
/// document with the config under `"config"`. Missing fields take the
/// baseline values.
pub fn parse(text: &str) -> Result<SystemConfig, Error> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("config").is_some() {
        Ok(serde_json::from_value::<presets::Preset>(value)?.config)
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

pub fn resolve(preset: Option<&str>, path: Option<&Path>) -> Result<SystemConfig, CliError> {
    let config = match (preset, path) {
        (Some(name), None) => presets::config(name)?,
        (None, Some(p)) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            parse(&text)?
        }
        _ => return Err(CliError::Config("give exactly one of --preset or --config".into())),
    };
    let diags = validate_config(&config);
    if diags.is_empty() {
        Ok(config)
    } else {
        Err(Error::InvalidConfig(diags).into())
    }
}
