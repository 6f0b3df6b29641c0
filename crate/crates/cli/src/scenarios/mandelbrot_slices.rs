use dimlab_core::{conservation_profile, mandelbrot_config, CellSource, Direction, Grid};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::percolate_dim::validate_sampling;
use super::{ensure, parse_ladder, surviving_samples, Outcome, Scenario};
use crate::config::{ThresholdSpec, Thresholds};
use crate::error::Result;
use crate::report::{Bound, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub m: usize,
    pub d: usize,
    pub p: f64,
    pub depth: usize,
    pub samples: usize,
    pub max_attempts: u64,
    pub epsilon: f64,
    pub betas: Vec<f64>,
    pub scales: String,
    pub grid: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            m: 3,
            d: 2,
            p: 0.85,
            depth: 7,
            samples: 16,
            max_attempts: 1000,
            epsilon: 0.25,
            betas: vec![0.0, 0.5, 1.0],
            scales: "3:-2:-7".into(),
            grid: 512,
        }
    }
}

/// Conservation profiles of surviving Mandelbrot samples.
pub struct MandelbrotSlices;

impl Scenario for MandelbrotSlices {
    const NAME: &'static str = "mandelbrot-slices";
    const THRESHOLDS: &'static [ThresholdSpec] = &[ThresholdSpec {
        name: "min_mean_fraction",
        default: 0.3,
        bound: Bound::AtLeast,
    }];
    type Params = Params;

    fn validate(p: &Params) -> Result<()> {
        validate_sampling(p.m, p.d, p.p, p.depth, p.samples)?;
        parse_ladder("parameters.scales", &p.scales)?;
        ensure(
            !p.betas.is_empty(),
            "parameters.betas",
            "at least one direction is needed",
        )?;
        ensure(p.grid >= 1, "parameters.grid", "must be at least 1")?;
        ensure(
            p.epsilon.is_finite(),
            "parameters.epsilon",
            "must be finite",
        )
    }

    fn run(p: &Params, seed: u64, t: &Thresholds) -> Result<Outcome> {
        let (ifs, law) = mandelbrot_config::<f64>(p.m, p.d, p.p)?;
        let scales = parse_ladder("parameters.scales", &p.scales)?;
        let finest = scales.iter().copied().fold(f64::INFINITY, f64::min);
        let mut table = Table::new(&[
            "sample",
            "seed",
            "beta",
            "supported",
            "qualifying",
            "qualifying_fraction",
        ]);
        let (mut sum, mut n) = (0.0, 0usize);
        for (i, item) in
            surviving_samples(&law, ifs.len(), p.depth, p.samples, seed, p.max_attempts).enumerate()
        {
            let (s, sample, _) = item?;
            for &beta in &p.betas {
                let dir = Direction::planar(beta);
                let grid = Grid::across_ball(&ifs, &dir, p.grid, 2.0 * finest)?;
                let source = CellSource::Sample {
                    ifs: &ifs,
                    sample: &sample,
                };
                let prof = conservation_profile(source, &dir, p.epsilon, &grid, &scales)?;
                sum += prof.qualifying_fraction;
                n += 1;
                table.push(vec![
                    json!(i),
                    json!(s),
                    json!(beta),
                    json!(prof.supported),
                    json!(prof.qualifying),
                    json!(prof.qualifying_fraction),
                ]);
            }
        }
        Ok(Outcome {
            checks: vec![t.check("min_mean_fraction", sum / n as f64)],
            table,
        })
    }
}
