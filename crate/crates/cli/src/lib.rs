//! Scenario runner and single-operation commands for the `dimlab` binary.
//!
//! A scenario is a named experiment configured by a TOML file with a mandatory seed,
//! optional `[parameters]` and `[thresholds]` tables. Its [`Report`] is a pure function
//! of the effective configuration, apart from the wall-clock field.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod scenarios;

pub use config::{ScenarioConfig, ThresholdSpec, Thresholds};
pub use error::{CliError, Result};
pub use report::{Bound, Check, Format, Report, Table};
pub use scenarios::{run_config, run_named, NAMES};
