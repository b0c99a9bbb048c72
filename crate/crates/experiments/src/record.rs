//! Tabular run records and their CSV form.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Parses CSV produced by [`to_csv`](Self::to_csv). Cells never contain
    /// commas or quotes, so no quoting is handled.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().context("empty CSV")?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != columns.len() {
                bail!(
                    "CSV row {} has {} cells, header has {}",
                    i + 1,
                    row.len(),
                    columns.len()
                );
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .with_context(|| format!("missing column {name}"))
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[i].parse::<f64>()
                    .with_context(|| format!("column {name}: bad number {:?}", r[i]))
            })
            .collect()
    }

    pub fn column_str(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Shortest round-trip form (scientific for very small or large magnitudes),
/// so CSV values parse back exactly.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Everything one experiment invocation produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub experiment: String,
    pub config_hash: String,
    pub base_seed: u64,
    /// One row per iteration (convergence), per run (tradeoff) or per trial (gradcheck).
    pub raw: Table,
    /// Mean/std statistics recomputable from `raw`.
    pub aggregate: Table,
    /// Wall-clock measurements, kept apart from the deterministic tables.
    pub timings: Table,
    /// Human-readable descriptions of cells that did not complete.
    pub failures: Vec<String>,
    /// The gradient check exceeded its threshold.
    pub threshold_breached: bool,
}

impl RunRecord {
    /// 0 on success, 2 on a threshold breach, 1 on any other run failure.
    pub fn exit_code(&self) -> i32 {
        if self.threshold_breached {
            2
        } else if !self.failures.is_empty() {
            1
        } else {
            0
        }
    }
}
