//! Named experiments. Each one declares its parameters (with defaults), its
//! thresholds, and a runner producing checks and a results table.

use std::time::Instant;

use dimlab_core::rng::derive_seed;
use dimlab_core::{sample_surviving, Ifs, OffspringLaw, PercolationSample};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{from_value, ScenarioConfig, ThresholdSpec, Thresholds};
use crate::error::{CliError, Result};
use crate::report::{Check, Report, Table};

pub mod exceptional_scan;
pub mod fourier_decay;
pub mod mandelbrot_slices;
pub mod moran;
pub mod percolate_dim;
pub mod probe;
pub mod projection_positivity;
pub mod sections_conservation;

pub const NAMES: &[&str] = &[
    "moran",
    "percolate-dim",
    "projection-positivity",
    "sections-conservation",
    "mandelbrot-slices",
    "probe",
    "exceptional-scan",
    "fourier-decay",
];

pub struct Outcome {
    pub checks: Vec<Check>,
    pub table: Table,
}

pub trait Scenario {
    const NAME: &'static str;
    const THRESHOLDS: &'static [ThresholdSpec];
    type Params: Serialize + DeserializeOwned + Default;

    /// Errors name the offending `parameters.*` path.
    fn validate(params: &Self::Params) -> Result<()>;

    fn run(params: &Self::Params, seed: u64, thresholds: &Thresholds) -> Result<Outcome>;
}

/// Runs the scenario named in `cfg`.
pub fn run_config(cfg: &ScenarioConfig) -> Result<Report> {
    let name = cfg
        .scenario
        .as_deref()
        .ok_or_else(|| CliError::invalid("scenario", "missing; name the scenario to run"))?;
    run_named(name, cfg)
}

pub fn run_named(name: &str, cfg: &ScenarioConfig) -> Result<Report> {
    match name {
        "moran" => execute::<moran::Moran>(cfg),
        "percolate-dim" => execute::<percolate_dim::PercolateDim>(cfg),
        "projection-positivity" => execute::<projection_positivity::ProjectionPositivity>(cfg),
        "sections-conservation" => execute::<sections_conservation::SectionsConservation>(cfg),
        "mandelbrot-slices" => execute::<mandelbrot_slices::MandelbrotSlices>(cfg),
        "probe" => execute::<probe::Probe>(cfg),
        "exceptional-scan" => execute::<exceptional_scan::ExceptionalScan>(cfg),
        "fourier-decay" => execute::<fourier_decay::FourierDecay>(cfg),
        other => Err(CliError::invalid(
            "scenario",
            format!("unknown scenario {other:?}; known: {}", NAMES.join(", ")),
        )),
    }
}

pub fn execute<S: Scenario>(cfg: &ScenarioConfig) -> Result<Report> {
    if let Some(n) = cfg.scenario.as_deref() {
        if n != S::NAME {
            return Err(CliError::invalid(
                "scenario",
                format!("config is for {n:?} but was run as {:?}", S::NAME),
            ));
        }
    }
    let params: S::Params = from_value("parameters", toml::Value::Table(cfg.parameters.clone()))?;
    S::validate(&params)?;
    let thresholds = Thresholds::resolve(S::THRESHOLDS, &cfg.thresholds, cfg.allow_loosening)?;
    let parameters = serde_json::to_value(&params)?;
    let effective = serde_json::json!({
        "scenario": S::NAME,
        "seed": cfg.seed,
        "override": cfg.allow_loosening,
        "parameters": parameters,
        "thresholds": thresholds.values(),
    });
    let config_hash = hex::encode(Sha256::digest(serde_json::to_vec(&effective)?));
    let start = Instant::now();
    let outcome = S::run(&params, cfg.seed, &thresholds)?;
    let pass = outcome.checks.iter().all(|c| c.pass);
    Ok(Report {
        scenario: S::NAME.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_hash,
        parameters,
        thresholds: thresholds.values().clone(),
        checks: outcome.checks,
        pass,
        table: outcome.table,
        wall_clock_seconds: Some(start.elapsed().as_secs_f64()),
    })
}

pub fn ensure(ok: bool, path: &str, msg: impl std::fmt::Display) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::invalid(path, msg))
    }
}

/// Parses `base:from:to` into `base^from, …, base^to`.
pub fn parse_ladder(path: &str, s: &str) -> Result<Vec<f64>> {
    let bad = || CliError::invalid(path, format!("expected base:from:to, got {s:?}"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [base, from, to] = parts[..] else {
        return Err(bad());
    };
    let base: f64 = base.parse().map_err(|_| bad())?;
    let from: i32 = from.parse().map_err(|_| bad())?;
    let to: i32 = to.parse().map_err(|_| bad())?;
    ensure(
        base > 1.0 && base.is_finite(),
        path,
        "ladder base must exceed 1",
    )?;
    ensure(
        from.abs_diff(to) >= 2,
        path,
        "ladder needs at least three scales",
    )?;
    Ok(dimlab_core::regression::scale_ladder(base, from, to))
}

/// A scale whose stopping set, for an equal-ratio system, is exactly level `n`.
pub(crate) fn level_scale(ifs: &Ifs<f64>, n: usize) -> Result<f64> {
    let r = ifs
        .equal_ratio()
        .ok_or_else(|| CliError::invalid("parameters", "system must have equal ratios"))?;
    Ok(ifs.c0() * r.powi(n as i32) * 0.6)
}

/// Surviving Mandelbrot samples; sample `i` is `sample_surviving` with seed
/// `derive_seed(seed, i)`.
pub(crate) fn surviving_samples(
    law: &OffspringLaw,
    arity: usize,
    depth: usize,
    count: usize,
    seed: u64,
    max_attempts: u64,
) -> impl Iterator<Item = Result<(u64, PercolationSample, u64)>> + '_ {
    (0..count as u64).map(move |i| {
        let s = derive_seed(seed, i);
        let (sample, attempts) = sample_surviving(law, arity, depth, s, max_attempts)?;
        Ok((s, sample, attempts))
    })
}

/// Validation shared by the Mandelbrot scenarios.
pub(crate) fn check_mandelbrot(m: usize, d: usize, p: f64) -> Result<()> {
    ensure(m >= 2, "parameters.m", "must be at least 2")?;
    ensure(
        d == 2,
        "parameters.d",
        "only planar (d = 2) projections are supported",
    )?;
    ensure(p > 0.0 && p <= 1.0, "parameters.p", "must lie in (0, 1]")?;
    let mean = p * (m * m) as f64;
    ensure(
        mean > 1.0,
        "parameters.p",
        format!("subcritical: mean offspring {mean} <= 1"),
    )
}
