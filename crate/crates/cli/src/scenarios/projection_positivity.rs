use dimlab_core::{mandelbrot_config, projection_measures, CellSource, Direction};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::percolate_dim::validate_sampling;
use super::{ensure, level_scale, surviving_samples, Outcome, Scenario};
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
    /// Directions `β_j = πj/directions`.
    pub directions: usize,
    /// Cover level whose disks are projected.
    pub projection_level: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            m: 3,
            d: 2,
            p: 0.7,
            depth: 8,
            samples: 64,
            max_attempts: 1000,
            directions: 36,
            projection_level: 6,
        }
    }
}

/// Projections of surviving Mandelbrot samples onto a fan of lines.
pub struct ProjectionPositivity;

impl Scenario for ProjectionPositivity {
    const NAME: &'static str = "projection-positivity";
    const THRESHOLDS: &'static [ThresholdSpec] = &[ThresholdSpec {
        name: "min_measure",
        default: 0.05,
        bound: Bound::Above,
    }];
    type Params = Params;

    fn validate(p: &Params) -> Result<()> {
        validate_sampling(p.m, p.d, p.p, p.depth, p.samples)?;
        ensure(
            p.directions >= 1,
            "parameters.directions",
            "must be at least 1",
        )?;
        ensure(
            (1..=p.depth).contains(&p.projection_level),
            "parameters.projection_level",
            format!("must lie in 1..={}", p.depth),
        )
    }

    fn run(p: &Params, seed: u64, t: &Thresholds) -> Result<Outcome> {
        let (ifs, law) = mandelbrot_config::<f64>(p.m, p.d, p.p)?;
        let rho = level_scale(&ifs, p.projection_level)?;
        let betas: Vec<f64> = (0..p.directions)
            .map(|j| std::f64::consts::PI * j as f64 / p.directions as f64)
            .collect();
        let dirs: Vec<Direction<f64>> = betas.iter().map(|&b| Direction::planar(b)).collect();
        let mut table = Table::new(&["sample", "seed", "beta", "measure"]);
        let mut min = f64::INFINITY;
        for (i, item) in
            surviving_samples(&law, ifs.len(), p.depth, p.samples, seed, p.max_attempts).enumerate()
        {
            let (s, sample, _) = item?;
            let source = CellSource::Sample {
                ifs: &ifs,
                sample: &sample,
            };
            for (&beta, m) in betas.iter().zip(projection_measures(source, &dirs, rho)?) {
                min = min.min(m);
                table.push(vec![json!(i), json!(s), json!(beta), json!(m)]);
            }
        }
        Ok(Outcome {
            checks: vec![t.check("min_measure", min)],
            table,
        })
    }
}
