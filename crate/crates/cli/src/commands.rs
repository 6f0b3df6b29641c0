//! Single-operation commands that write one table.

use std::path::PathBuf;

use dimlab_core::exceptional::ExceptionalParams;
use dimlab_core::rng::derive_seed;
use dimlab_core::{
    conservation_profile, mandelbrot_config, measure_dimension, probe_sections, resolve,
    sample_measure, sample_tree, select_q, sq_law, standard_law, CellSource, Direction,
    ExceptionalScanner, FourierSystem, Grid, Ifs, OffspringLaw, DEFAULT_WORD_BUDGET,
};
use serde::Deserialize;
use serde_json::json;

use crate::config::from_value;
use crate::error::{CliError, Result};
use crate::report::Table;
use crate::scenarios::sections_conservation::profile_table;
use crate::scenarios::{ensure, parse_ladder};

fn load_ifs(path: &str, ifs: &str) -> Result<Ifs<f64>> {
    resolve(ifs).map_err(|e| CliError::invalid(path, e))
}

/// `standard:<alpha>`, `uniform:<p>`, or `table:<file>`.
pub fn parse_law(ifs: &Ifs<f64>, spec: &str) -> Result<OffspringLaw> {
    let bad = |msg: String| CliError::invalid("--law", msg);
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| bad(format!("expected kind:value, got {spec:?}")))?;
    let number = || {
        arg.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("not a number: {arg:?}")))
    };
    match kind {
        "standard" => Ok(standard_law(ifs, number()?)?),
        "uniform" => Ok(OffspringLaw::uniform(number()?)?),
        "table" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct TableFile {
                arity: usize,
                entries: Vec<(u64, f64)>,
            }
            let text = std::fs::read_to_string(arg).map_err(|e| bad(format!("{arg}: {e}")))?;
            let value: toml::Value =
                toml::from_str(&text).map_err(|e| bad(format!("{arg}: {}", e.message())))?;
            let t: TableFile = from_value(arg, value)?;
            Ok(OffspringLaw::table(t.arity, t.entries)?)
        }
        other => Err(bad(format!(
            "unknown law kind {other:?}; use standard, uniform or table"
        ))),
    }
}

#[derive(Clone, Debug)]
pub struct PercolateSpec {
    pub ifs: Ifs<f64>,
    pub law: OffspringLaw,
    pub depth: usize,
    pub seeds: usize,
    pub seed: u64,
}

impl PercolateSpec {
    pub fn from_ifs(ifs: &str, law: &str, depth: usize, seeds: usize, seed: u64) -> Result<Self> {
        let ifs = load_ifs("--ifs", ifs)?;
        let law = parse_law(&ifs, law)?;
        Ok(Self {
            ifs,
            law,
            depth,
            seeds,
            seed,
        })
    }

    pub fn mandelbrot(
        m: usize,
        d: usize,
        p: f64,
        depth: usize,
        seeds: usize,
        seed: u64,
    ) -> Result<Self> {
        let (ifs, law) = mandelbrot_config(m, d, p)?;
        Ok(Self {
            ifs,
            law,
            depth,
            seeds,
            seed,
        })
    }
}

/// Columns: seed, survived, count_at_depth, generation_counts (space separated).
pub fn percolate(spec: &PercolateSpec) -> Result<Table> {
    let mut table = Table::new(&["seed", "survived", "count_at_depth", "generation_counts"]);
    for i in 0..spec.seeds as u64 {
        let s = derive_seed(spec.seed, i);
        let sample = sample_tree(&spec.law, spec.ifs.len(), spec.depth, s)?;
        let counts = sample.generation_counts();
        let text: Vec<String> = counts.iter().map(usize::to_string).collect();
        table.push(vec![
            json!(s),
            json!(sample.survived()),
            json!(counts[spec.depth]),
            json!(text.join(" ")),
        ]);
    }
    Ok(table)
}

#[derive(Clone, Debug)]
pub struct SectionsSpec {
    pub ifs: String,
    pub beta: f64,
    pub eps: f64,
    pub scales: String,
    pub grid: usize,
}

/// Columns: x, scale, count, slope, r2, qualifies.
pub fn sections(spec: &SectionsSpec) -> Result<Table> {
    let ifs = load_ifs("--ifs", &spec.ifs)?;
    let scales = parse_ladder("--scales", &spec.scales)?;
    let dir = Direction::planar(spec.beta);
    let finest = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let grid = Grid::across_ball(&ifs, &dir, spec.grid, 2.0 * finest)?;
    let profile = conservation_profile(CellSource::Full(&ifs), &dir, spec.eps, &grid, &scales)?;
    Ok(profile_table(&profile))
}

#[derive(Clone, Debug)]
pub struct ProbeSpec {
    pub ifs: String,
    pub alpha: f64,
    pub beta: f64,
    pub trials: usize,
    pub depth: usize,
    pub grid: usize,
    pub seed: u64,
}

/// Columns: x, hit_frequency.
pub fn probe(spec: &ProbeSpec) -> Result<Table> {
    let ifs = load_ifs("--ifs", &spec.ifs)?;
    let dir = Direction::planar(spec.beta);
    let rmax = ifs.ratios().into_iter().fold(0.0, f64::max);
    let trim = 2.0 * ifs.c0() * rmax.powi(spec.depth as i32);
    let grid = Grid::across_ball(&ifs, &dir, spec.grid, trim)?;
    let res = probe_sections(
        &ifs,
        spec.alpha,
        &dir,
        &grid.points,
        spec.depth,
        spec.trials,
        spec.seed,
    )?;
    let mut table = Table::new(&["x", "hit_frequency"]);
    for (x, f) in res.x_grid.iter().zip(&res.frequencies) {
        table.push(vec![json!(x), json!(f)]);
    }
    Ok(table)
}

#[derive(Clone, Debug)]
pub struct FourierSpec {
    pub ifs: String,
    pub eps: f64,
    pub q: usize,
    pub k: usize,
    pub beta: f64,
    pub tau: f64,
    pub ladder: [usize; 2],
    pub depth: usize,
    pub seed: u64,
}

/// `η̂_{q,k}(t w_β)` on `t = τ r^{−qkn}`. Columns: t, re, im, modulus, tail_bound.
pub fn fourier(spec: &FourierSpec) -> Result<Table> {
    ensure(spec.k >= 2, "--k", "must be at least 2")?;
    ensure(
        spec.ladder[0] <= spec.ladder[1],
        "--ladder",
        "from must not exceed to",
    )?;
    let ifs = load_ifs("--ifs", &spec.ifs)?;
    let law = sq_law(&ifs, spec.eps, spec.q)?;
    let system = FourierSystem::new(&ifs.power_system(spec.q, DEFAULT_WORD_BUDGET)?, 1)?;
    let sample = sample_measure(&law, spec.depth, spec.seed)?;
    let w = Direction::planar(spec.beta);
    let mut table = Table::new(&["t", "re", "im", "modulus", "tail_bound"]);
    for n in spec.ladder[0]..=spec.ladder[1] {
        let t = spec.tau * system.ratio_q().powi(-((spec.k * n) as i32));
        let xi = [t * w.unit()[0], t * w.unit()[1]];
        let z = system.eta_hat(&sample, spec.k, xi)?;
        let bound = system.tail_bound(xi, system.truncation_for(xi));
        table.push(vec![
            json!(t),
            json!(z.re),
            json!(z.im),
            json!(z.norm()),
            json!(bound),
        ]);
    }
    Ok(table)
}

#[derive(Clone, Debug)]
pub struct MeasureDimSpec {
    pub ifs: String,
    pub eps: f64,
    /// Block length; chosen automatically up to `q_max` when `None`.
    pub q: Option<usize>,
    pub q_max: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Columns: q, estimate, std_error, trials.
pub fn measure_dim(spec: &MeasureDimSpec) -> Result<Table> {
    let ifs = load_ifs("--ifs", &spec.ifs)?;
    let (q, est) = match spec.q {
        Some(q) => {
            let law = sq_law(&ifs, spec.eps, q)?;
            let r = ifs
                .equal_ratio()
                .ok_or_else(|| CliError::invalid("--ifs", "needs equal ratios"))?;
            (q, measure_dimension(&law, r, spec.trials, spec.seed)?)
        }
        None => {
            let (q, _, est) = select_q(&ifs, spec.eps, spec.q_max, spec.trials, spec.seed)?;
            (q, est)
        }
    };
    let mut table = Table::new(&["q", "estimate", "std_error", "trials"]);
    table.push(vec![
        json!(q),
        json!(est.mean),
        json!(est.std_error),
        json!(est.trials),
    ]);
    Ok(table)
}

/// Columns: beta, max_fraction, witness_tau, member.
pub fn exceptional(params: &ExceptionalParams, beta_grid: usize) -> Result<Table> {
    let scan = ExceptionalScanner::new(params)?.scan_uniform(beta_grid);
    let mut table = Table::new(&["beta", "max_fraction", "witness_tau", "member"]);
    for r in &scan.results {
        table.push(vec![
            json!(r.beta),
            json!(r.max_fraction),
            json!(r.witness_tau),
            json!(r.is_member),
        ]);
    }
    Ok(table)
}

/// Where a command's table goes.
#[derive(Clone, Debug, Default)]
pub struct Output {
    pub out: Option<PathBuf>,
    pub format: Option<crate::report::Format>,
}
