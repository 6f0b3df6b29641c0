//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dimlab_core::ExceptionalParams;

use crate::commands::{
    self, FourierSpec, MeasureDimSpec, Output, PercolateSpec, ProbeSpec, SectionsSpec,
};
use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::report::{emit_with, Format, Table};
use crate::scenarios;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "DIMLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "dimlab",
    version,
    about = "Dimension experiments on self-similar sets and percolation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Replaces the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Runs the scenario named in the config file.
    Run(ScenarioArgs),
    /// Similarity dimension of fixed ratio lists.
    Moran(ScenarioArgs),
    /// Box-counting slope of Mandelbrot samples against the closed form.
    PercolateDim(ScenarioArgs),
    /// Projected length of Mandelbrot samples in many directions.
    ProjectionPositivity(ScenarioArgs),
    /// Share of offsets whose section slope is near the expected value.
    SectionsConservation(ScenarioArgs),
    /// Section slopes of Mandelbrot samples across directions.
    MandelbrotSlices(ScenarioArgs),
    /// Stability of the exceptional set as N grows.
    ExceptionalScan(ScenarioArgs),
    /// Fourier decay along a ray against a degenerate system.
    FourierDecay(ScenarioArgs),
    /// The probe scenario with --config; otherwise per-offset hit frequencies.
    Probe(ProbeArgs),
    /// Percolation samples of a system under an offspring law.
    Percolate(PercolateArgs),
    /// Mandelbrot percolation samples.
    Mandelbrot(MandelbrotArgs),
    /// Section counts and slopes across a grid of offsets.
    Sections(SectionsArgs),
    /// Fourier transform of a random measure along a ray.
    Fourier(FourierArgs),
    /// Dimension proxy of the random measure law.
    MeasureDim(MeasureDimArgs),
    /// Exceptional-direction scan on a uniform grid.
    Exceptional(ExceptionalArgs),
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "sierpinski-carpet")]
    pub ifs: String,
    #[arg(long, default_value_t = 0.79)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct PercolateArgs {
    #[arg(long)]
    pub ifs: String,
    /// standard:<alpha>, uniform:<p> or table:<file>.
    #[arg(long)]
    pub law: String,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    /// Number of samples.
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    /// Base seed; sample i uses a seed derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args)]
pub struct MandelbrotArgs {
    #[arg(long = "M", default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args)]
pub struct SectionsArgs {
    #[arg(long)]
    pub ifs: String,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// base:from:to
    #[arg(long, default_value = "3:-2:-7")]
    pub scales: String,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    #[arg(long, default_value = "rotational")]
    pub ifs: String,
    #[arg(long, default_value_t = 0.3)]
    pub eps: f64,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0.7)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// from:to
    #[arg(long, default_value = "2:6")]
    pub ladder: String,
    #[arg(long, default_value_t = 64)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args)]
pub struct MeasureDimArgs {
    #[arg(long, default_value = "rotational")]
    pub ifs: String,
    #[arg(long, default_value_t = 0.3)]
    pub eps: f64,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub q_max: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutArgs,
}

#[derive(Debug, Args)]
pub struct ExceptionalArgs {
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value_t = 0.333)]
    pub delta: f64,
    #[arg(long = "N", default_value_t = 100)]
    pub n: u32,
    #[arg(long, default_value_t = 2048)]
    pub beta_grid: usize,
    #[arg(long, default_value_t = 4096)]
    pub tau_grid: usize,
    #[command(flatten)]
    pub output: OutArgs,
}

fn parse_pair(path: &str, s: &str) -> Result<[usize; 2]> {
    let bad = || CliError::invalid(path, format!("expected from:to, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok([
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ])
}

/// Builds the global pool from [`THREADS_ENV`] when set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::invalid(
            THREADS_ENV,
            format!("expected a positive integer, got {v:?}"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::invalid(THREADS_ENV, e))
}

fn scenario(name: Option<&str>, args: &ScenarioArgs) -> Result<bool> {
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    run_scenario(name, &cfg, args.out.clone(), args.format)
}

fn run_scenario(
    name: Option<&str>,
    cfg: &ScenarioConfig,
    out: Option<PathBuf>,
    format: Option<Format>,
) -> Result<bool> {
    let report = match name {
        Some(n) => scenarios::run_named(n, cfg)?,
        None => scenarios::run_config(cfg)?,
    };
    let out = out.or_else(|| cfg.output.clone());
    let format = format
        .or(cfg.format)
        .or_else(|| out.as_deref().map(Format::from_path))
        .unwrap_or(Format::Json);
    report.emit(format, out.as_deref())?;
    for c in &report.checks {
        eprintln!(
            "{} {}: {} vs {:?} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound,
            c.threshold
        );
    }
    Ok(report.pass)
}

fn write_table(table: &Table, out: &OutArgs) -> Result<bool> {
    emit_table(
        table,
        &Output {
            out: out.out.clone(),
            format: out.format,
        },
    )
}

fn emit_table(table: &Table, out: &Output) -> Result<bool> {
    match out.format.unwrap_or(Format::Csv) {
        Format::Csv => emit_with(out.out.as_deref(), |w| table.write_csv(w))?,
        Format::Json => emit_with(out.out.as_deref(), |w| {
            serde_json::to_writer_pretty(&mut *w, table)?;
            w.write_all(b"\n")?;
            Ok(())
        })?,
    }
    Ok(true)
}

/// Runs a parsed command; `Ok(false)` means some threshold failed.
pub fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(a) => scenario(None, &a),
        Command::Moran(a) => scenario(Some("moran"), &a),
        Command::PercolateDim(a) => scenario(Some("percolate-dim"), &a),
        Command::ProjectionPositivity(a) => scenario(Some("projection-positivity"), &a),
        Command::SectionsConservation(a) => scenario(Some("sections-conservation"), &a),
        Command::MandelbrotSlices(a) => scenario(Some("mandelbrot-slices"), &a),
        Command::ExceptionalScan(a) => scenario(Some("exceptional-scan"), &a),
        Command::FourierDecay(a) => scenario(Some("fourier-decay"), &a),
        Command::Probe(a) => match &a.config {
            Some(path) => {
                let mut cfg = ScenarioConfig::load(path)?;
                if let Some(s) = a.seed {
                    cfg.seed = s;
                }
                run_scenario(Some("probe"), &cfg, a.out.clone(), a.format)
            }
            None => {
                let spec = ProbeSpec {
                    ifs: a.ifs,
                    alpha: a.alpha,
                    beta: a.beta,
                    trials: a.trials,
                    depth: a.depth,
                    grid: a.grid,
                    seed: a.seed.unwrap_or(0),
                };
                emit_table(
                    &commands::probe(&spec)?,
                    &Output {
                        out: a.out,
                        format: a.format,
                    },
                )
            }
        },
        Command::Percolate(a) => {
            let spec = PercolateSpec::from_ifs(&a.ifs, &a.law, a.depth, a.seeds, a.seed)?;
            write_table(&commands::percolate(&spec)?, &a.output)
        }
        Command::Mandelbrot(a) => {
            let spec = PercolateSpec::mandelbrot(a.m, a.d, a.p, a.depth, a.seeds, a.seed)?;
            write_table(&commands::percolate(&spec)?, &a.output)
        }
        Command::Sections(a) => {
            let spec = SectionsSpec {
                ifs: a.ifs,
                beta: a.beta,
                eps: a.eps,
                scales: a.scales,
                grid: a.grid,
            };
            write_table(&commands::sections(&spec)?, &a.output)
        }
        Command::Fourier(a) => {
            let spec = FourierSpec {
                ifs: a.ifs,
                eps: a.eps,
                q: a.q,
                k: a.k,
                beta: a.beta,
                tau: a.tau,
                ladder: parse_pair("--ladder", &a.ladder)?,
                depth: a.depth,
                seed: a.seed,
            };
            write_table(&commands::fourier(&spec)?, &a.output)
        }
        Command::MeasureDim(a) => {
            let spec = MeasureDimSpec {
                ifs: a.ifs,
                eps: a.eps,
                q: a.q,
                q_max: a.q_max,
                trials: a.trials,
                seed: a.seed,
            };
            write_table(&commands::measure_dim(&spec)?, &a.output)
        }
        Command::Exceptional(a) => {
            let params = ExceptionalParams {
                r: a.r,
                gamma: a.gamma,
                b: a.b,
                theta: a.theta,
                q: a.q,
                k: a.k,
                n: a.n,
                delta: a.delta,
                tau_grid_size: a.tau_grid,
                diagnostic: false,
            };
            params
                .validate()
                .map_err(|e| CliError::invalid("exceptional", e))?;
            write_table(&commands::exceptional(&params, a.beta_grid)?, &a.output)
        }
    }
}

/// Process entry point: returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = init_threads().and_then(|()| dispatch(cli));
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("dimlab: {e}");
            e.exit_code()
        }
    }
}
