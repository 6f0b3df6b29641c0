//! Scenario configuration files.
//!
//! ```toml
//! scenario = "percolate-dim"
//! seed = 7
//! override = false
//!
//! [parameters]
//! samples = 64
//!
//! [thresholds]
//! slope_tolerance = 0.1
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::report::{Bound, Check, Format};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Must match the scenario it is run as, when given.
    #[serde(default)]
    pub scenario: Option<String>,
    pub seed: u64,
    /// Allows thresholds looser than the defaults.
    #[serde(default, rename = "override")]
    pub allow_loosening: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub parameters: toml::Table,
    #[serde(default)]
    pub thresholds: toml::Table,
}

impl std::str::FromStr for ScenarioConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let value: toml::Value =
            toml::from_str(s).map_err(|e| CliError::invalid("config", e.message()))?;
        from_value("", value)
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(&path.display().to_string(), e))?;
        text.parse()
    }

    /// A config with only a seed; every parameter and threshold at its default.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            scenario: None,
            seed,
            allow_loosening: false,
            output: None,
            format: None,
            parameters: toml::Table::new(),
            thresholds: toml::Table::new(),
        }
    }
}

/// Deserializes with the failing key path in the error, prefixed by `prefix`.
pub(crate) fn from_value<T: DeserializeOwned>(prefix: &str, value: toml::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner == ".") {
            (true, true) => "config".to_string(),
            (true, false) => inner,
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{inner}"),
        };
        CliError::invalid(&path, e.into_inner())
    })
}

/// A named pass criterion with its default value.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdSpec {
    pub name: &'static str,
    pub default: f64,
    pub bound: Bound,
}

/// Effective thresholds of one run.
#[derive(Clone, Debug)]
pub struct Thresholds {
    specs: &'static [ThresholdSpec],
    values: BTreeMap<String, f64>,
}

impl Thresholds {
    /// Defaults overlaid with `table`; unknown names, non-numbers and (without
    /// `allow_loosening`) values looser than the default are errors.
    pub fn resolve(
        specs: &'static [ThresholdSpec],
        table: &toml::Table,
        allow_loosening: bool,
    ) -> Result<Self> {
        let mut values: BTreeMap<String, f64> = specs
            .iter()
            .map(|s| (s.name.to_string(), s.default))
            .collect();
        for (key, v) in table {
            let path = format!("thresholds.{key}");
            let spec = specs.iter().find(|s| s.name == key).ok_or_else(|| {
                let known: Vec<&str> = specs.iter().map(|s| s.name).collect();
                CliError::invalid(
                    &path,
                    format!("unknown threshold; known: {}", known.join(", ")),
                )
            })?;
            let x = match v {
                toml::Value::Float(x) => *x,
                toml::Value::Integer(i) => *i as f64,
                _ => return Err(CliError::invalid(&path, "expected a number")),
            };
            if !x.is_finite() {
                return Err(CliError::invalid(&path, "must be finite"));
            }
            if !allow_loosening && spec.bound.loosens(x, spec.default) {
                return Err(CliError::invalid(
                    &path,
                    format!(
                        "{x} is looser than the default {} ({:?}); set `override = true` to allow it",
                        spec.default, spec.bound
                    ),
                ));
            }
            values.insert(key.clone(), x);
        }
        Ok(Self { specs, values })
    }

    pub fn defaults(specs: &'static [ThresholdSpec]) -> Self {
        Self::resolve(specs, &toml::Table::new(), false).expect("defaults are valid")
    }

    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    /// Compares `value` with the threshold `name`.
    pub fn check(&self, name: &str, value: f64) -> Check {
        let spec = self
            .specs
            .iter()
            .find(|s| s.name == name)
            .unwrap_or_else(|| panic!("undeclared threshold {name}"));
        Check::new(name, value, self.values[name], spec.bound)
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPECS: &[ThresholdSpec] = &[
        ThresholdSpec {
            name: "min_fraction",
            default: 0.5,
            bound: Bound::AtLeast,
        },
        ThresholdSpec {
            name: "tolerance",
            default: 0.15,
            bound: Bound::AtMost,
        },
    ];

    fn table(s: &str) -> toml::Table {
        toml::from_str(s).unwrap()
    }

    #[test]
    fn tightening_is_allowed() {
        let t = Thresholds::resolve(SPECS, &table("min_fraction = 0.7\ntolerance = 0.1"), false)
            .unwrap();
        assert_eq!(t.get("min_fraction"), 0.7);
        assert_eq!(t.get("tolerance"), 0.1);
    }

    #[test]
    fn loosening_needs_override() {
        let err = Thresholds::resolve(SPECS, &table("tolerance = 0.2"), false).unwrap_err();
        assert!(err.to_string().contains("thresholds.tolerance"), "{err}");
        assert!(Thresholds::resolve(SPECS, &table("tolerance = 0.2"), true).is_ok());
        let err = Thresholds::resolve(SPECS, &table("bogus = 1"), true).unwrap_err();
        assert!(err.to_string().contains("thresholds.bogus"));
    }

    #[test]
    fn seed_is_mandatory() {
        let err = "scenario = \"moran\""
            .parse::<ScenarioConfig>()
            .unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
        let err = "seed = 1\nextra = 2".parse::<ScenarioConfig>().unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }
}
