use dimlab_core::sections::surviving_cell_dimension;
use dimlab_core::{mandelbrot_config, percolation_dimension};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{check_mandelbrot, ensure, surviving_samples, Outcome, Scenario};
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
    /// Levels `[from, to]` of the surviving-cell regression.
    pub fit_levels: [usize; 2],
    pub max_attempts: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            m: 3,
            d: 2,
            p: 0.7,
            depth: 8,
            samples: 64,
            fit_levels: [1, 8],
            max_attempts: 1000,
        }
    }
}

pub(crate) fn validate_sampling(
    m: usize,
    d: usize,
    p: f64,
    depth: usize,
    samples: usize,
) -> Result<()> {
    check_mandelbrot(m, d, p)?;
    ensure(depth >= 1, "parameters.depth", "must be at least 1")?;
    ensure(samples >= 1, "parameters.samples", "must be at least 1")
}

/// Box-counting slope of surviving Mandelbrot samples against the closed form.
pub struct PercolateDim;

impl Scenario for PercolateDim {
    const NAME: &'static str = "percolate-dim";
    const THRESHOLDS: &'static [ThresholdSpec] = &[
        ThresholdSpec {
            name: "slope_tolerance",
            default: 0.15,
            bound: Bound::AtMost,
        },
        ThresholdSpec {
            name: "min_r2",
            default: 0.98,
            bound: Bound::AtLeast,
        },
    ];
    type Params = Params;

    fn validate(p: &Params) -> Result<()> {
        validate_sampling(p.m, p.d, p.p, p.depth, p.samples)?;
        let [a, b] = p.fit_levels;
        ensure(
            a < b && b <= p.depth && b - a >= 2,
            "parameters.fit_levels",
            format!("need from < to <= depth with at least three levels, got {a}..{b}"),
        )
    }

    fn run(p: &Params, seed: u64, t: &Thresholds) -> Result<Outcome> {
        let (ifs, law) = mandelbrot_config::<f64>(p.m, p.d, p.p)?;
        let expected = percolation_dimension(&law, &ifs)?;
        let ratio = 1.0 / p.m as f64;
        let mut table = Table::new(&[
            "sample",
            "seed",
            "attempts",
            "cells_at_depth",
            "slope",
            "r2",
        ]);
        let (mut sum, mut min_r2) = (0.0, f64::INFINITY);
        for (i, item) in
            surviving_samples(&law, ifs.len(), p.depth, p.samples, seed, p.max_attempts).enumerate()
        {
            let (s, sample, attempts) = item?;
            let est = surviving_cell_dimension(&sample, ratio, p.fit_levels[0]..=p.fit_levels[1])?;
            sum += est.slope;
            min_r2 = min_r2.min(est.r2);
            let cells = sample.generation_counts()[p.depth];
            table.push(vec![
                json!(i),
                json!(s),
                json!(attempts),
                json!(cells),
                json!(est.slope),
                json!(est.r2),
            ]);
        }
        let mean = sum / p.samples as f64;
        Ok(Outcome {
            checks: vec![
                t.check("slope_tolerance", (mean - expected).abs()),
                t.check("min_r2", min_r2),
            ],
            table,
        })
    }
}
