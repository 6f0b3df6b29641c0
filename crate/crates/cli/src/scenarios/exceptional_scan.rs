use dimlab_core::{ExceptionalParams, ExceptionalScanner, GridScan};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ensure, Outcome, Scenario};
use crate::config::{ThresholdSpec, Thresholds};
use crate::error::{CliError, Result};
use crate::report::{Bound, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub r: f64,
    pub gamma: f64,
    pub b: f64,
    pub theta: f64,
    pub q: u32,
    pub k: u32,
    pub delta: f64,
    /// Values of `N`, scanned in order; member fractions should not grow.
    pub ns: Vec<u32>,
    pub beta_grid: usize,
    pub tau_grid: usize,
    /// A smaller `δ` whose member set must lie inside that of `delta`.
    pub subset_delta: f64,
    pub subset_n: u32,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            r: 0.5,
            gamma: 0.0,
            b: 1.0,
            theta: 1.0,
            q: 2,
            k: 2,
            delta: 1.0 / 3.0,
            ns: vec![50, 100, 200],
            beta_grid: 2048,
            tau_grid: 4096,
            subset_delta: 0.2,
            subset_n: 50,
        }
    }
}

impl Params {
    fn exceptional(&self, n: u32, delta: f64) -> ExceptionalParams {
        ExceptionalParams {
            r: self.r,
            gamma: self.gamma,
            b: self.b,
            theta: self.theta,
            q: self.q,
            k: self.k,
            n,
            delta,
            tau_grid_size: self.tau_grid,
            diagnostic: false,
        }
    }
}

/// Exceptional-direction member fractions on a uniform grid, for growing `N`.
pub struct ExceptionalScan;

impl Scenario for ExceptionalScan {
    const NAME: &'static str = "exceptional-scan";
    const THRESHOLDS: &'static [ThresholdSpec] = &[
        ThresholdSpec {
            name: "max_increase_cells",
            default: 1.0,
            bound: Bound::AtMost,
        },
        ThresholdSpec {
            name: "subset_violations",
            default: 0.0,
            bound: Bound::AtMost,
        },
    ];
    type Params = Params;

    fn validate(p: &Params) -> Result<()> {
        ensure(
            !p.ns.is_empty(),
            "parameters.ns",
            "at least one N is needed",
        )?;
        ensure(
            p.beta_grid >= 1,
            "parameters.beta_grid",
            "must be at least 1",
        )?;
        for (i, &n) in p.ns.iter().enumerate() {
            p.exceptional(n, p.delta)
                .validate()
                .map_err(|e| CliError::invalid(&format!("parameters.ns[{i}]"), e))?;
        }
        ensure(
            p.subset_delta > 0.0 && p.subset_delta < p.delta,
            "parameters.subset_delta",
            format!("must lie in (0, delta = {})", p.delta),
        )?;
        p.exceptional(p.subset_n, p.subset_delta)
            .validate()
            .map_err(|e| CliError::invalid("parameters.subset_n", e))
    }

    fn run(p: &Params, _seed: u64, t: &Thresholds) -> Result<Outcome> {
        let mut table = Table::new(&["n", "delta", "members", "member_fraction", "peak_fraction"]);
        let row = |table: &mut Table, n: u32, delta: f64, scan: &GridScan| {
            let peak = scan
                .results
                .iter()
                .map(|r| r.max_fraction)
                .fold(0.0, f64::max);
            table.push(vec![
                json!(n),
                json!(delta),
                json!(scan.members.len()),
                json!(scan.member_fraction),
                json!(peak),
            ]);
        };
        let mut scans = Vec::with_capacity(p.ns.len());
        for &n in &p.ns {
            let scan =
                ExceptionalScanner::new(&p.exceptional(n, p.delta))?.scan_uniform(p.beta_grid);
            row(&mut table, n, p.delta, &scan);
            scans.push((n, scan));
        }
        let increase = scans
            .windows(2)
            .map(|w| w[1].1.members.len() as f64 - w[0].1.members.len() as f64)
            .fold(0.0, f64::max);
        let small = ExceptionalScanner::new(&p.exceptional(p.subset_n, p.subset_delta))?
            .scan_uniform(p.beta_grid);
        row(&mut table, p.subset_n, p.subset_delta, &small);
        let large = match scans.iter().find(|(n, _)| *n == p.subset_n) {
            Some((_, s)) => s.members.clone(),
            None => {
                ExceptionalScanner::new(&p.exceptional(p.subset_n, p.delta))?
                    .scan_uniform(p.beta_grid)
                    .members
            }
        };
        let violations = small
            .members
            .iter()
            .filter(|i| large.binary_search(i).is_err())
            .count();
        Ok(Outcome {
            checks: vec![
                t.check("max_increase_cells", increase),
                t.check("subset_violations", violations as f64),
            ],
            table,
        })
    }
}
