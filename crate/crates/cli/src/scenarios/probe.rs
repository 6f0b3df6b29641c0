use dimlab_core::rng::derive_seed;
use dimlab_core::{
    conservation_profile, moran_dimension, probe_sections, resolve, CellSource, Direction, Grid,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ensure, parse_ladder, Outcome, Scenario};
use crate::config::{ThresholdSpec, Thresholds};
use crate::error::{CliError, Result};
use crate::report::{Bound, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub ifs: String,
    /// Probing exponent `α = dim − 1 − alpha_gap`.
    pub alpha_gap: f64,
    /// `ε` of the profile that splits offsets into qualifying and not.
    pub profile_epsilon: f64,
    pub beta: f64,
    pub depth: usize,
    pub trials: usize,
    /// Percolation samples behind each trial's hit frequencies.
    pub batch: usize,
    pub scales: String,
    pub grid: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            ifs: "sierpinski-carpet".into(),
            alpha_gap: 0.1,
            profile_epsilon: 0.1,
            beta: 0.0,
            depth: 8,
            trials: 200,
            batch: 32,
            scales: "3:-2:-7".into(),
            grid: 512,
        }
    }
}

/// Standard percolation as a probe: qualifying offsets should be hit more often.
pub struct Probe;

impl Scenario for Probe {
    const NAME: &'static str = "probe";
    const THRESHOLDS: &'static [ThresholdSpec] = &[ThresholdSpec {
        name: "min_win_rate",
        default: 0.9,
        bound: Bound::AtLeast,
    }];
    type Params = Params;

    fn validate(p: &Params) -> Result<()> {
        parse_ladder("parameters.scales", &p.scales)?;
        ensure(
            p.alpha_gap.is_finite(),
            "parameters.alpha_gap",
            "must be finite",
        )?;
        ensure(
            p.profile_epsilon.is_finite(),
            "parameters.profile_epsilon",
            "must be finite",
        )?;
        ensure(p.depth >= 1, "parameters.depth", "must be at least 1")?;
        ensure(p.trials >= 1, "parameters.trials", "must be at least 1")?;
        ensure(p.batch >= 1, "parameters.batch", "must be at least 1")?;
        ensure(p.grid >= 1, "parameters.grid", "must be at least 1")
    }

    fn run(p: &Params, seed: u64, t: &Thresholds) -> Result<Outcome> {
        let ifs = resolve::<f64>(&p.ifs).map_err(|e| CliError::invalid("parameters.ifs", e))?;
        let alpha = moran_dimension(&ifs)? - 1.0 - p.alpha_gap;
        ensure(
            alpha >= 0.0,
            "parameters.alpha_gap",
            format!("gives negative alpha {alpha}"),
        )?;
        let scales = parse_ladder("parameters.scales", &p.scales)?;
        let dir = Direction::planar(p.beta);
        let finest = scales.iter().copied().fold(f64::INFINITY, f64::min);
        let grid = Grid::across_ball(&ifs, &dir, p.grid, 2.0 * finest)?;
        let profile = conservation_profile(
            CellSource::Full(&ifs),
            &dir,
            p.profile_epsilon,
            &grid,
            &scales,
        )?;
        let last = scales
            .iter()
            .position(|&s| s == finest)
            .expect("finest scale is in the ladder");
        // Offsets outside the projection take part in neither group.
        let (mut yes, mut no) = (Vec::new(), Vec::new());
        for (j, pt) in profile.points.iter().enumerate() {
            if pt.counts[last] > 0 {
                if pt.qualifies {
                    yes.push(j)
                } else {
                    no.push(j)
                }
            }
        }
        ensure(
            !yes.is_empty() && !no.is_empty(),
            "parameters.profile_epsilon",
            format!(
                "profile splits offsets {} / {}; both groups must be non-empty",
                yes.len(),
                no.len()
            ),
        )?;
        let mut table = Table::new(&["trial", "seed", "qualifying_mean", "other_mean", "win"]);
        let mut wins = 0usize;
        for trial in 0..p.trials {
            let s = derive_seed(seed, trial as u64);
            let res = probe_sections(&ifs, alpha, &dir, &grid.points, p.depth, p.batch, s)?;
            let mean = |idx: &[usize]| {
                idx.iter().map(|&j| res.frequencies[j]).sum::<f64>() / idx.len() as f64
            };
            let (a, b) = (mean(&yes), mean(&no));
            wins += usize::from(a > b);
            table.push(vec![
                json!(trial),
                json!(s),
                json!(a),
                json!(b),
                json!(a > b),
            ]);
        }
        Ok(Outcome {
            checks: vec![t.check("min_win_rate", wins as f64 / p.trials as f64)],
            table,
        })
    }
}
