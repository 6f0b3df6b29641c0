//! Scenario reports and their JSON / CSV forms.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// Guesses from a file extension; anything but `.csv` is JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Json,
        }
    }
}

/// How a measured value is compared with its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtLeast,
    Above,
    AtMost,
    Below,
}

impl Bound {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Self::AtLeast => value >= threshold,
            Self::Above => value > threshold,
            Self::AtMost => value <= threshold,
            Self::Below => value < threshold,
        }
    }

    /// Would `candidate` accept something `default` rejects?
    pub fn loosens(self, candidate: f64, default: f64) -> bool {
        match self {
            Self::AtLeast | Self::Above => candidate < default,
            Self::AtMost | Self::Below => candidate > default,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, threshold: f64, bound: Bound) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            bound,
            pass: bound.holds(value, threshold),
        }
    }
}

/// A results table; cells are JSON scalars.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Header, then one record per row. An empty table is just the header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell_text))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The text a cell has in CSV: numbers exactly as JSON prints them.
pub fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub version: String,
    pub seed: u64,
    /// SHA-256 of the effective configuration.
    pub config_hash: String,
    pub parameters: Value,
    pub thresholds: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(flatten)]
    pub table: Table,
    /// Not part of the deterministic content.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// JSON without the wall-clock field; identical for identical config and seed.
    pub fn deterministic_json(&self) -> Result<String> {
        Self {
            wall_clock_seconds: None,
            ..self.clone()
        }
        .to_json()
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> Result<()> {
        match format {
            Format::Json => out.write_all(self.to_json()?.as_bytes())?,
            Format::Csv => self.table.write_csv(out)?,
        }
        Ok(())
    }

    /// Writes to `path`, or stdout when `None`.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<()> {
        emit_with(path, |w| self.write(format, w))
    }
}

pub(crate) fn emit_with(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
        Some(p) => {
            let wrap = |source| CliError::Output {
                path: p.display().to_string(),
                source,
            };
            let file = std::fs::File::create(p).map_err(wrap)?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(wrap)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn bounds() {
        assert!(Bound::Above.holds(0.1, 0.05) && !Bound::Above.holds(0.05, 0.05));
        assert!(Bound::AtMost.holds(0.15, 0.15));
        assert!(Bound::AtLeast.loosens(0.4, 0.5) && !Bound::AtLeast.loosens(0.6, 0.5));
        assert!(Bound::AtMost.loosens(0.2, 0.15));
    }

    #[test]
    fn cells_keep_json_spelling() {
        assert_eq!(cell_text(&json!(0.1)), "0.1");
        assert_eq!(cell_text(&json!(1e-300)), "1e-300");
        assert_eq!(cell_text(&json!("a,b")), "a,b");
        assert_eq!(cell_text(&json!(true)), "true");
        assert_eq!(cell_text(&Value::Null), "");
    }

    #[test]
    fn quoted_csv() {
        let mut t = Table::new(&["name", "v"]);
        t.push(vec![json!("a,b"), json!(2)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "name,v\n\"a,b\",2\n");
    }
}
