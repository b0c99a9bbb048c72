//! Writes a run record to its output directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::plot::render_svg;
use crate::record::RunRecord;

pub const RAW_FILE: &str = "raw_traces.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const PLOT_FILE: &str = "plot.svg";
pub const CONFIG_FILE: &str = "config_echo";
pub const META_FILE: &str = "meta.json";
pub const TIMINGS_FILE: &str = "timings.csv";

#[derive(Debug, Serialize)]
struct Meta<'a> {
    version: &'a str,
    experiment: &'a str,
    config_hash: &'a str,
    base_seed: u64,
    threads: Option<usize>,
    timings: Timings,
    raw_rows: usize,
    aggregate_rows: usize,
    failures: &'a [String],
    threshold_breached: bool,
    exit_code: i32,
}

#[derive(Debug, Serialize)]
struct Timings {
    total_ms: f64,
}

/// `<root>/<experiment>_<confighash>`.
pub fn run_dir(root: &Path, record: &RunRecord) -> PathBuf {
    root.join(format!("{}_{}", record.experiment, record.config_hash))
}

/// The CSV a record's chart is drawn from.
pub fn plot_source(record: &RunRecord) -> String {
    if record.experiment == "gradcheck" {
        record.raw.to_csv()
    } else {
        record.aggregate.to_csv()
    }
}

/// Writes all artifacts and returns the run directory.
pub fn write_outputs(
    record: &RunRecord,
    cfg: &ExperimentConfig,
    root: &Path,
    threads: Option<usize>,
    total_ms: f64,
) -> Result<PathBuf> {
    let dir = run_dir(root, record);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, contents: &str| {
        let path = dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    };
    write(RAW_FILE, &record.raw.to_csv())?;
    write(AGGREGATE_FILE, &record.aggregate.to_csv())?;
    write(
        PLOT_FILE,
        &render_svg(&record.experiment, &plot_source(record))?,
    )?;
    write(CONFIG_FILE, &cfg.to_toml())?;
    write(TIMINGS_FILE, &record.timings.to_csv())?;
    let meta = Meta {
        version: env!("CARGO_PKG_VERSION"),
        experiment: &record.experiment,
        config_hash: &record.config_hash,
        base_seed: record.base_seed,
        threads,
        timings: Timings { total_ms },
        raw_rows: record.raw.rows.len(),
        aggregate_rows: record.aggregate.rows.len(),
        failures: &record.failures,
        threshold_breached: record.threshold_breached,
        exit_code: record.exit_code(),
    };
    write(META_FILE, &serde_json::to_string_pretty(&meta)?)?;
    Ok(dir)
}
