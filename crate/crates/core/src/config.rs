//! TOML descriptions of iterated function systems and the shipped example catalog.
//!
//! ```toml
//! name = "sierpinski-carpet"
//! ambient_dim = 2
//! separation = "osc-assumed"
//!
//! [[maps]]
//! ratio = "1/3"
//! angle = 0.0
//! translation = [0.0, "2/3"]
//! ```
//!
//! Numbers may be written as TOML floats, integers, or `"p/q"` strings.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::{Ifs, Metadata, Separation, Similarity, DEFAULT_WORD_BUDGET};
use crate::scalar::Scalar;

/// A real number given as a float or as a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    pub fn value(&self) -> Result<f64> {
        match self {
            Self::Int(i) => Ok(*i as f64),
            Self::Float(x) => Ok(*x),
            Self::Text(s) => parse_ratio(s),
        }
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Self::Float(x)
    }
}

fn parse_ratio(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("cannot parse number {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = f64::from_str(p.trim()).map_err(|_| bad())?;
            let q = f64::from_str(q.trim()).map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            Ok(p / q)
        }
        None => f64::from_str(s.trim()).map_err(|_| bad()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub ratio: Number,
    #[serde(default = "zero")]
    pub angle: Number,
    pub translation: Vec<Number>,
}

fn zero() -> Number {
    Number::Float(0.0)
}

fn default_ssc_depth() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub ambient_dim: usize,
    #[serde(default)]
    pub separation: Separation,
    /// Depth at which a declared `ssc-verified` is checked.
    #[serde(default = "default_ssc_depth")]
    pub ssc_depth: usize,
    #[serde(default)]
    pub dense_rotations: Option<bool>,
    #[serde(default)]
    pub hull_projection: Option<bool>,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default)]
    pub word_budget: Option<u64>,
    pub maps: Vec<MapConfig>,
}

impl FromStr for IfsConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

impl IfsConfig {
    pub fn load(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn word_budget(&self) -> u64 {
        self.word_budget.unwrap_or(DEFAULT_WORD_BUDGET)
    }

    /// Builds the system; a declared `ssc-verified` must pass the disjointness check.
    pub fn build<T: Scalar>(&self) -> Result<Ifs<T>> {
        let lit = |n: &Number, what: &str, i: usize| -> Result<T> {
            let v = n.value()?;
            if !v.is_finite() {
                return Err(Error::Config(format!("maps[{i}].{what} is not finite")));
            }
            Ok(T::lit(v))
        };
        let maps = self
            .maps
            .iter()
            .enumerate()
            .map(|(i, m)| {
                if m.translation.len() != self.ambient_dim {
                    return Err(Error::Config(format!(
                        "maps[{i}].translation has {} coordinates, ambient_dim is {}",
                        m.translation.len(),
                        self.ambient_dim
                    )));
                }
                let a = m
                    .translation
                    .iter()
                    .map(|x| lit(x, "translation", i))
                    .collect::<Result<Vec<T>>>()?;
                Similarity::new(lit(&m.ratio, "ratio", i)?, lit(&m.angle, "angle", i)?, a)
                    .map_err(|e| Error::Config(format!("maps[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let meta = Metadata {
            name: self.name.clone(),
            labels: self.labels.clone(),
            dense_rotations: self.dense_rotations,
            hull_projection: self.hull_projection,
        };
        let ifs = Ifs::new(maps)?.with_metadata(meta);
        match self.separation {
            Separation::SscVerified => ifs.verify_ssc(self.ssc_depth, self.word_budget()),
            other => Ok(ifs.with_separation(other)),
        }
    }
}

const CATALOG: &[(&str, &str)] = &[
    ("unit-square", include_str!("../catalog/unit-square.toml")),
    (
        "sierpinski-triangle",
        include_str!("../catalog/sierpinski-triangle.toml"),
    ),
    (
        "sierpinski-carpet",
        include_str!("../catalog/sierpinski-carpet.toml"),
    ),
    ("rotational", include_str!("../catalog/rotational.toml")),
    (
        "rotational-degenerate",
        include_str!("../catalog/rotational-degenerate.toml"),
    ),
    (
        "one-dim-sierpinski",
        include_str!("../catalog/one-dim-sierpinski.toml"),
    ),
    (
        "cantor-interval",
        include_str!("../catalog/cantor-interval.toml"),
    ),
];

pub fn catalog_names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|c| c.0)
}

pub fn catalog_config(name: &str) -> Result<IfsConfig> {
    CATALOG
        .iter()
        .find(|c| c.0 == name)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown catalog entry {name:?}; known: {}",
                catalog_names().collect::<Vec<_>>().join(", ")
            ))
        })?
        .1
        .parse()
}

pub fn catalog<T: Scalar>(name: &str) -> Result<Ifs<T>> {
    catalog_config(name)?.build()
}

/// A catalog name, or otherwise a path to a TOML file.
pub fn resolve<T: Scalar>(name_or_path: &str) -> Result<Ifs<T>> {
    if catalog_names().any(|n| n == name_or_path) {
        catalog(name_or_path)
    } else {
        IfsConfig::load(Path::new(name_or_path))?.build()
    }
}
