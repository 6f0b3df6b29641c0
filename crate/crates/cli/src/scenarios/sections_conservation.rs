use dimlab_core::{
    conservation_profile, resolve, CellSource, ConservationProfile, Direction, Grid,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ensure, parse_ladder, Outcome, Scenario};
use crate::config::{ThresholdSpec, Thresholds};
use crate::error::{CliError, Result};
use crate::report::{Bound, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    /// Catalog name or path to a system TOML.
    pub ifs: String,
    pub beta: f64,
    pub epsilon: f64,
    pub scales: String,
    pub grid: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            ifs: "sierpinski-carpet".into(),
            beta: 0.0,
            epsilon: 0.15,
            scales: "3:-2:-7".into(),
            grid: 512,
        }
    }
}

/// Section dimensions of a deterministic attractor across a grid of offsets.
pub struct SectionsConservation;

impl Scenario for SectionsConservation {
    const NAME: &'static str = "sections-conservation";
    const THRESHOLDS: &'static [ThresholdSpec] = &[ThresholdSpec {
        name: "min_fraction",
        default: 0.5,
        bound: Bound::AtLeast,
    }];
    type Params = Params;

    fn validate(p: &Params) -> Result<()> {
        parse_ladder("parameters.scales", &p.scales)?;
        ensure(p.grid >= 1, "parameters.grid", "must be at least 1")?;
        ensure(
            p.epsilon.is_finite(),
            "parameters.epsilon",
            "must be finite",
        )?;
        ensure(p.beta.is_finite(), "parameters.beta", "must be finite")
    }

    fn run(p: &Params, _seed: u64, t: &Thresholds) -> Result<Outcome> {
        let ifs = resolve::<f64>(&p.ifs).map_err(|e| CliError::invalid("parameters.ifs", e))?;
        let scales = parse_ladder("parameters.scales", &p.scales)?;
        let dir = Direction::planar(p.beta);
        let finest = scales.iter().copied().fold(f64::INFINITY, f64::min);
        let grid = Grid::across_ball(&ifs, &dir, p.grid, 2.0 * finest)?;
        let profile =
            conservation_profile(CellSource::Full(&ifs), &dir, p.epsilon, &grid, &scales)?;
        Ok(Outcome {
            checks: vec![t.check("min_fraction", profile.qualifying_fraction)],
            table: profile_table(&profile),
        })
    }
}

/// One row per (offset, scale): x, scale, count, slope, r2, qualifies.
pub fn profile_table(profile: &ConservationProfile<f64>) -> Table {
    let mut table = Table::new(&["x", "scale", "count", "slope", "r2", "qualifies"]);
    for point in &profile.points {
        let (slope, r2) = match &point.estimate {
            Some(e) => (json!(e.slope), json!(e.r2)),
            None => (Value::Null, Value::Null),
        };
        for (&scale, &count) in profile.scales.iter().zip(&point.counts) {
            table.push(vec![
                json!(point.x),
                json!(scale),
                json!(count),
                slope.clone(),
                r2.clone(),
                json!(point.qualifies),
            ]);
        }
    }
    table
}
