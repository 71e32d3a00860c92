//! Experiment harness for `cic-core`.
//!
//! An experiment is a resolved [`config::ExperimentConfig`] run once per
//! seed. Results land in `<out>/<algo>[-cic][-lambda<x>]/<env>/` as per-seed
//! learning curves, lambda traces, a summary, an aggregate curve and SVG
//! plots (see [`output`]).

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod report;
pub mod runner;

pub use config::{CliOverrides, ExperimentConfig, FileConfig};
pub use error::{HarnessError, Result};
pub use runner::{run_experiment, run_seed, sweep, Execution, ExperimentReport, SeedOutcome, SweepReport};
