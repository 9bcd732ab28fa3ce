//! Named channel parameter sets shipped with the crate.

use super::malaga::MalagaParams;
use super::shadowed_rician::ShadowedRicianParams;
use crate::error::{Error, Result};
use serde::Deserialize;
use std::collections::BTreeMap;

const EMBEDDED: &str = include_str!("../../presets/presets.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Presets {
    pub label: String,
    #[serde(default)]
    pub malaga: BTreeMap<String, MalagaParams>,
    #[serde(default)]
    pub shadowed_rician: BTreeMap<String, ShadowedRicianParams>,
}

impl Presets {
    pub fn embedded() -> Self {
        toml::from_str(EMBEDDED).expect("embedded presets parse")
    }

    /// Add or replace entries from another preset table.
    pub fn merge(&mut self, other: Presets) {
        self.malaga.extend(other.malaga);
        self.shadowed_rician.extend(other.shadowed_rician);
    }

    pub fn malaga(&self, name: &str) -> Result<MalagaParams> {
        self.malaga.get(name).copied().ok_or_else(|| Error::Config {
            path: format!("malaga.{name}"),
            msg: format!("unknown preset; available: {:?}", self.malaga.keys().collect::<Vec<_>>()),
        })
    }

    pub fn shadowed_rician(&self, name: &str) -> Result<ShadowedRicianParams> {
        self.shadowed_rician.get(name).copied().ok_or_else(|| Error::Config {
            path: format!("shadowed_rician.{name}"),
            msg: format!(
                "unknown preset; available: {:?}",
                self.shadowed_rician.keys().collect::<Vec<_>>()
            ),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_presets_valid() {
        let p = Presets::embedded();
        assert_eq!(p.malaga.len(), 3);
        assert_eq!(p.shadowed_rician.len(), 3);
        for v in p.malaga.values() {
            v.validate().unwrap();
        }
        for v in p.shadowed_rician.values() {
            v.validate().unwrap();
        }
        assert!(p.malaga("nope").is_err());
    }
}
