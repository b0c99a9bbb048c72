//! Configuration-driven experiments for the Bayesian-FIM precoder: objective
//! and gradient-norm convergence, the sensing/communication trade-off sweep,
//! and a gradient check.
//!
//! Each run writes `<out>/<experiment>_<confighash>/` containing
//! `raw_traces.csv`, `aggregate.csv`, `plot.svg`, `config_echo`, `meta.json`
//! and `timings.csv`. Everything except `meta.json` and `timings.csv` is a
//! deterministic function of the config and seed.

pub mod config;
pub mod output;
pub mod plot;
pub mod record;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind, GridDims};
pub use record::{RunRecord, Table};
pub use runner::{run_experiment, run_with_threads};
