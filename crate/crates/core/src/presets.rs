//! Built-in parameter sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: String,
    pub description: String,
    #[serde(default)]
    pub notes: Vec<String>,
    pub config: SystemConfig,
}

const SOURCES: [(&str, &str); 4] = [
    ("fig2a", include_str!("../presets/fig2a.json")),
    ("fig2b", include_str!("../presets/fig2b.json")),
    ("fig3-baseline", include_str!("../presets/fig3-baseline.json")),
    ("fig4", include_str!("../presets/fig4.json")),
];

pub fn names() -> Vec<&'static str> {
    SOURCES.iter().map(|(n, _)| *n).collect()
}

/// The raw JSON document of a preset.
pub fn source(name: &str) -> Result<&'static str> {
    SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

pub fn load(name: &str) -> Result<Preset> {
    Ok(serde_json::from_str(source(name)?)?)
}

pub fn config(name: &str) -> Result<SystemConfig> {
    load(name).map(|p| p.config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_rates, InitialState};

    #[test]
    fn catalog() {
        assert_eq!(names(), ["fig2a", "fig2b", "fig3-baseline", "fig4"]);
        for n in names() {
            let p = load(n).unwrap();
            assert_eq!(p.name, n);
            derive_rates(&p.config).unwrap();
        }
        assert!(matches!(load("fig9"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn baseline_is_the_default_config() {
        assert_eq!(config("fig3-baseline").unwrap(), SystemConfig::default());
    }

    #[test]
    fn density_parameters() {
        let a = derive_rates(&config("fig2a").unwrap()).unwrap();
        let b = derive_rates(&config("fig2b").unwrap()).unwrap();
        assert!((a.l - 1e-5).abs() < 1e-15);
        assert!((b.l - 4.0).abs() < 1e-12);
        let f4 = config("fig4").unwrap();
        assert!(!f4.trapping_on);
        assert_eq!(f4.initial_state, InitialState::Ground);
    }
}
