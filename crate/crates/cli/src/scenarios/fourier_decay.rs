use dimlab_core::exceptional::from_ifs_pair;
use dimlab_core::rng::derive_seed;
use dimlab_core::{
    fourier_decay, resolve, sample_measure, select_q, Direction, FourierSystem, Ifs,
    RandomWeightLaw, DEFAULT_WORD_BUDGET,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ensure, Outcome, Scenario};
use crate::config::{ThresholdSpec, Thresholds};
use crate::error::{CliError, Result};
use crate::report::{Bound, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub ifs: String,
    /// Same ratios and rotation with coincident translations.
    pub degenerate_ifs: String,
    pub epsilon: f64,
    pub q_max: usize,
    pub q_trials: usize,
    pub k: usize,
    pub beta: f64,
    pub tau: f64,
    pub ladder: [usize; 2],
    pub depth: usize,
    pub samples: usize,
    /// Maps whose translation difference defines the exceptional-set test.
    pub pair: [usize; 2],
    pub delta: f64,
    pub n: u32,
    pub tau_grid: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            ifs: "rotational".into(),
            degenerate_ifs: "rotational-degenerate".into(),
            epsilon: 0.3,
            q_max: 8,
            q_trials: 50_000,
            k: 3,
            beta: 0.7,
            tau: 1.0,
            ladder: [2, 6],
            depth: 64,
            samples: 16,
            pair: [0, 1],
            delta: 1.0 / 3.0,
            n: 100,
            tau_grid: 4096,
        }
    }
}

/// Decay of `|η̂_{q,k}|` along a ray, against a degenerate system that cannot decay.
pub struct FourierDecay;

fn slopes(
    ifs: &Ifs<f64>,
    law: &RandomWeightLaw,
    q: usize,
    p: &Params,
    seed: u64,
) -> Result<Vec<(u64, Option<f64>, bool)>> {
    let system = FourierSystem::new(&ifs.power_system(q, DEFAULT_WORD_BUDGET)?, 1)?;
    let dir = Direction::planar(p.beta);
    (0..p.samples as u64)
        .map(|i| {
            let s = derive_seed(seed, i + 1);
            let sample = sample_measure(law, p.depth, s)?;
            let est = fourier_decay(
                &sample,
                &system,
                p.k,
                &dir,
                p.tau,
                p.ladder[0]..=p.ladder[1],
            )?;
            Ok((s, est.slope, est.exact_zero))
        })
        .collect()
}

impl Scenario for FourierDecay {
    const NAME: &'static str = "fourier-decay";
    const THRESHOLDS: &'static [ThresholdSpec] = &[
        ThresholdSpec {
            name: "min_slope",
            default: 0.0,
            bound: Bound::Above,
        },
        ThresholdSpec {
            name: "degenerate_max_slope",
            default: 0.02,
            bound: Bound::AtMost,
        },
        ThresholdSpec {
            name: "beta_member",
            default: 0.0,
            bound: Bound::AtMost,
        },
    ];
    type Params = Params;

    fn validate(p: &Params) -> Result<()> {
        ensure(p.epsilon > 0.0, "parameters.epsilon", "must be positive")?;
        ensure(p.q_max >= 1, "parameters.q_max", "must be at least 1")?;
        ensure(p.q_trials >= 2, "parameters.q_trials", "must be at least 2")?;
        ensure(p.k >= 2, "parameters.k", "must be at least 2")?;
        ensure(p.tau > 0.0, "parameters.tau", "must be positive")?;
        ensure(
            p.ladder[0] < p.ladder[1],
            "parameters.ladder",
            "need at least two rungs, from < to",
        )?;
        ensure(p.depth >= 1, "parameters.depth", "must be at least 1")?;
        ensure(p.samples >= 1, "parameters.samples", "must be at least 1")
    }

    fn run(p: &Params, seed: u64, t: &Thresholds) -> Result<Outcome> {
        let ifs = resolve::<f64>(&p.ifs).map_err(|e| CliError::invalid("parameters.ifs", e))?;
        let flat = resolve::<f64>(&p.degenerate_ifs)
            .map_err(|e| CliError::invalid("parameters.degenerate_ifs", e))?;
        let (q, law, _) = select_q(&ifs, p.epsilon, p.q_max, p.q_trials, derive_seed(seed, 0))?;
        let exc = from_ifs_pair(
            &ifs, p.pair[0], p.pair[1], q as u32, p.k as u32, p.delta, p.n, p.tau_grid,
        )?;
        let member = dimlab_core::membership_fraction(&exc, p.beta)?;
        let mut table = Table::new(&["system", "q", "sample", "seed", "slope", "exact_zero"]);
        let mut fitted: [Vec<Option<f64>>; 2] = [Vec::new(), Vec::new()];
        for (j, (name, sys)) in [(&p.ifs, &ifs), (&p.degenerate_ifs, &flat)]
            .into_iter()
            .enumerate()
        {
            for (i, (s, slope, zero)) in slopes(sys, &law, q, p, seed)?.into_iter().enumerate() {
                fitted[j].push(slope);
                table.push(vec![
                    json!(name),
                    json!(q),
                    json!(i),
                    json!(s),
                    json!(slope),
                    json!(zero),
                ]);
            }
        }
        // A missing fit (NaN) fails whichever check it feeds.
        let extreme = |v: &[Option<f64>], pick: fn(f64, f64) -> f64, start: f64| {
            v.iter()
                .try_fold(start, |acc, s| s.map(|x| pick(acc, x)))
                .unwrap_or(f64::NAN)
        };
        let min_slope = extreme(&fitted[0], f64::min, f64::INFINITY);
        let flat_max = extreme(&fitted[1], f64::max, f64::NEG_INFINITY);
        Ok(Outcome {
            checks: vec![
                t.check("min_slope", min_slope),
                t.check("degenerate_max_slope", flat_max),
                t.check("beta_member", f64::from(u8::from(member.is_member))),
            ],
            table,
        })
    }
}
