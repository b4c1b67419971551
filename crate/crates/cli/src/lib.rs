//! Experiment harness for the IRS beamforming solver.
//!
//! Each experiment kind writes one CSV whose bytes depend only on the
//! [`ExperimentSpec`], plus a `.wall.csv` sidecar with wall-clock times.

pub mod baseline;
pub mod config;
pub mod error;
pub mod experiments;

pub use baseline::{baseline_random_mrt, baseline_rng, BaselineResult};
pub use config::{Cli, ExperimentKind, ExperimentSpec, OptimizerKind};
pub use error::{CliError, Result};
pub use experiments::{run, ConvergenceReport, Report, ResultRow, RunReport};
