//! Experiment drivers.
//!
//! Each experiment is a list of independent cells (scenario × sample count,
//! scenario × α, or gradient-check trial). Cells are evaluated in parallel
//! with seeds derived from the base seed and the cell coordinates, and the
//! results are reduced in cell order, so outputs do not depend on scheduling.

use std::time::Instant;

use anyhow::{bail, Result};
use isac_precoder::bfim::SampledObjective;
use isac_precoder::gradient::{euclidean_gradient, fd_gradient, GradientReport};
use isac_precoder::manifold::random_point;
use isac_precoder::optimizer::{run, IterationRecord, OptimizerConfig, RunOutput};
use isac_precoder::sampler::{sample_prior, sample_scenario};
use isac_precoder::seed::derive_seed;
use isac_precoder::system::ChannelParams;
use isac_precoder::C64;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::record::{mean_std, median, num, RunRecord, Table};

/// Maximum acceptable gradient-check relative error.
pub const GRADCHECK_THRESHOLD: f64 = 1e-5;

pub const CONVERGENCE_RAW_COLUMNS: [&str; 12] = [
    "config_hash",
    "n_samples",
    "run",
    "iter",
    "objective",
    "neg_objective",
    "objective_after",
    "grad_norm",
    "step",
    "backtracks",
    "exhausted",
    "sample_seed",
];

pub const CONVERGENCE_AGGREGATE_COLUMNS: [&str; 8] = [
    "config_hash",
    "n_samples",
    "iter",
    "runs",
    "mean_neg_objective",
    "std_neg_objective",
    "mean_grad_norm",
    "std_grad_norm",
];

pub const TRADEOFF_RAW_COLUMNS: [&str; 8] = [
    "config_hash",
    "alpha",
    "run",
    "sensing",
    "comm",
    "objective",
    "final_grad_norm",
    "iterations",
];

pub const TRADEOFF_AGGREGATE_COLUMNS: [&str; 7] = [
    "config_hash",
    "alpha",
    "runs",
    "mean_sensing",
    "std_sensing",
    "mean_comm",
    "std_comm",
];

pub const GRADCHECK_RAW_COLUMNS: [&str; 6] = [
    "config_hash",
    "trial",
    "alpha",
    "rel_error",
    "analytic_norm",
    "fd_norm",
];

pub const GRADCHECK_AGGREGATE_COLUMNS: [&str; 4] =
    ["config_hash", "trials", "max_rel_error", "median_rel_error"];

const TIMING_COLUMNS: [&str; 3] = ["cell", "iter", "ms"];

/// Runs whichever experiment the config names.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::Convergence { .. } => run_convergence(cfg),
        ExperimentKind::Tradeoff { .. } => run_tradeoff(cfg),
        ExperimentKind::Gradcheck { .. } => run_gradcheck(cfg),
    }
}

/// Runs on a dedicated pool of `threads` workers (all cores when `None`).
pub fn run_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<RunRecord> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build()?.install(|| run_experiment(cfg))
}

/// Ground-truth scenario shared by all cells with the same run index.
pub fn scenario_for_run(cfg: &ExperimentConfig, run: usize) -> Result<ChannelParams> {
    Ok(sample_scenario(
        &cfg.scenario,
        &cfg.system,
        derive_seed(cfg.base_seed, "scenario", run as u64),
    )?)
}

/// Optimizer settings for one run; the iteration seed depends on the run only,
/// so different sample counts or α values see paired randomness.
pub fn optimizer_for_run(
    cfg: &ExperimentConfig,
    run: usize,
    samples_per_iter: usize,
) -> OptimizerConfig {
    OptimizerConfig {
        samples_per_iter,
        seed: derive_seed(cfg.base_seed, "optimizer", run as u64),
        ..cfg.optimizer.clone()
    }
}

/// Optimizes one scenario from its seeded random starting point.
pub fn optimize_run(
    cfg: &ExperimentConfig,
    run_index: usize,
    alpha: f64,
    samples_per_iter: usize,
) -> Result<(ChannelParams, RunOutput)> {
    let mean = scenario_for_run(cfg, run_index)?;
    let oc = cfg.objective_config(&mean, alpha)?;
    let init = random_point(
        cfg.system.n_tx,
        cfg.system.n_streams,
        cfg.system.power_budget,
        derive_seed(cfg.base_seed, "init", run_index as u64),
    )?;
    let opt = optimizer_for_run(cfg, run_index, samples_per_iter);
    let out = run(&oc, &opt, init)?;
    Ok((mean, out))
}

struct CellResult<T> {
    label: String,
    outcome: Result<T>,
    ms: Vec<(usize, f64)>,
}

fn timing_rows(timings: &mut Table, label: &str, ms: &[(usize, f64)]) {
    for (iter, v) in ms {
        timings.push(vec![label.to_string(), iter.to_string(), format!("{v:.3}")]);
    }
}

fn iteration_ms(records: &[IterationRecord]) -> Vec<(usize, f64)> {
    records.iter().map(|r| (r.iter, r.ms)).collect()
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let ExperimentKind::Convergence { n_list } = &cfg.experiment else {
        bail!("not a convergence config");
    };
    let hash = cfg.config_hash();
    let cells: Vec<(usize, usize)> = n_list
        .iter()
        .flat_map(|&n| (0..cfg.monte_carlo_runs).map(move |r| (n, r)))
        .collect();
    let results: Vec<CellResult<RunOutput>> = cells
        .par_iter()
        .map(|&(n, r)| {
            let outcome = optimize_run(cfg, r, cfg.alpha, n).map(|(_, out)| out);
            let ms = outcome
                .as_ref()
                .map(|o| iteration_ms(&o.trace.records))
                .unwrap_or_default();
            CellResult {
                label: format!("n={n};run={r}"),
                outcome,
                ms,
            }
        })
        .collect();

    let mut raw = Table::new(&CONVERGENCE_RAW_COLUMNS);
    let mut timings = Table::new(&TIMING_COLUMNS);
    let mut failures = Vec::new();
    for (&(n, r), cell) in cells.iter().zip(&results) {
        timing_rows(&mut timings, &cell.label, &cell.ms);
        match &cell.outcome {
            Ok(out) => {
                for rec in &out.trace.records {
                    raw.push(vec![
                        hash.clone(),
                        n.to_string(),
                        r.to_string(),
                        rec.iter.to_string(),
                        num(rec.objective),
                        num(-rec.objective),
                        num(rec.objective_after),
                        num(rec.grad_norm),
                        num(rec.step),
                        rec.backtracks.to_string(),
                        rec.exhausted.to_string(),
                        rec.sample_seed.to_string(),
                    ]);
                }
            }
            Err(e) => failures.push(format!("{}: {e:#}", cell.label)),
        }
    }
    let aggregate = aggregate_convergence(&raw)?;
    Ok(RunRecord {
        experiment: "convergence".into(),
        config_hash: hash,
        base_seed: cfg.base_seed,
        raw,
        aggregate,
        timings,
        failures,
        threshold_breached: false,
    })
}

/// Per-(N, iteration) mean and std of `−f̂` and the gradient norm, over the
/// runs present in the raw table.
pub fn aggregate_convergence(raw: &Table) -> Result<Table> {
    let hashes = raw.column_str("config_hash")?;
    let ns = raw.column_f64("n_samples")?;
    let iters = raw.column_f64("iter")?;
    let negs = raw.column_f64("neg_objective")?;
    let grads = raw.column_f64("grad_norm")?;
    let mut keys: Vec<(u64, u64)> = ns
        .iter()
        .zip(&iters)
        .map(|(n, i)| (*n as u64, *i as u64))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let mut out = Table::new(&CONVERGENCE_AGGREGATE_COLUMNS);
    for (n, it) in keys {
        let idx: Vec<usize> = (0..ns.len())
            .filter(|&i| ns[i] as u64 == n && iters[i] as u64 == it)
            .collect();
        let (mn, sn) = mean_std(&idx.iter().map(|&i| negs[i]).collect::<Vec<_>>());
        let (mg, sg) = mean_std(&idx.iter().map(|&i| grads[i]).collect::<Vec<_>>());
        out.push(vec![
            hashes[idx[0]].to_string(),
            n.to_string(),
            it.to_string(),
            idx.len().to_string(),
            num(mn),
            num(sn),
            num(mg),
            num(sg),
        ]);
    }
    Ok(out)
}

struct TradeoffPoint {
    sensing: f64,
    comm: f64,
    objective: f64,
    final_grad_norm: f64,
    iterations: usize,
    ms: Vec<(usize, f64)>,
}

pub fn run_tradeoff(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let ExperimentKind::Tradeoff {
        alpha_list,
        eval_samples,
    } = &cfg.experiment
    else {
        bail!("not a tradeoff config");
    };
    let hash = cfg.config_hash();
    let cells: Vec<(f64, usize)> = alpha_list
        .iter()
        .flat_map(|&a| (0..cfg.monte_carlo_runs).map(move |r| (a, r)))
        .collect();
    let results: Vec<CellResult<TradeoffPoint>> = cells
        .par_iter()
        .map(|&(alpha, r)| {
            let outcome = tradeoff_cell(cfg, alpha, r, *eval_samples);
            let ms = outcome.as_ref().map(|p| p.ms.clone()).unwrap_or_default();
            CellResult {
                label: format!("alpha={alpha};run={r}"),
                outcome,
                ms,
            }
        })
        .collect();

    let mut raw = Table::new(&TRADEOFF_RAW_COLUMNS);
    let mut timings = Table::new(&TIMING_COLUMNS);
    let mut failures = Vec::new();
    for (&(alpha, r), cell) in cells.iter().zip(&results) {
        timing_rows(&mut timings, &cell.label, &cell.ms);
        match &cell.outcome {
            Ok(p) => raw.push(vec![
                hash.clone(),
                num(alpha),
                r.to_string(),
                num(p.sensing),
                num(p.comm),
                num(p.objective),
                num(p.final_grad_norm),
                p.iterations.to_string(),
            ]),
            Err(e) => failures.push(format!("{}: {e:#}", cell.label)),
        }
    }
    let aggregate = aggregate_tradeoff(&raw, alpha_list)?;
    Ok(RunRecord {
        experiment: "tradeoff".into(),
        config_hash: hash,
        base_seed: cfg.base_seed,
        raw,
        aggregate,
        timings,
        failures,
        threshold_breached: false,
    })
}

fn tradeoff_cell(
    cfg: &ExperimentConfig,
    alpha: f64,
    r: usize,
    eval_samples: usize,
) -> Result<TradeoffPoint> {
    let (mean, out) = optimize_run(cfg, r, alpha, cfg.optimizer.samples_per_iter)?;
    // the evaluation set depends on the scenario only, shared across α
    let eval = sample_prior(
        &mean,
        &cfg.scenario,
        eval_samples,
        derive_seed(cfg.base_seed, "eval", r as u64),
    )?;
    let oc = cfg.objective_config(&mean, alpha)?;
    let e = SampledObjective::new(&eval, &oc)?.evaluate(out.precoder.matrix())?;
    Ok(TradeoffPoint {
        sensing: e.sensing,
        comm: e.comm,
        objective: e.value,
        final_grad_norm: out.trace.last().map_or(f64::NAN, |r| r.grad_norm),
        iterations: out.trace.len(),
        ms: iteration_ms(&out.trace.records),
    })
}

/// Per-α mean and std of `f̂_s` and `f̂_c`, in `alpha_list` order.
pub fn aggregate_tradeoff(raw: &Table, alpha_list: &[f64]) -> Result<Table> {
    let hashes = raw.column_str("config_hash")?;
    let alphas = raw.column_f64("alpha")?;
    let sensing = raw.column_f64("sensing")?;
    let comm = raw.column_f64("comm")?;
    let mut out = Table::new(&TRADEOFF_AGGREGATE_COLUMNS);
    let mut seen: Vec<f64> = Vec::new();
    for &a in alpha_list {
        if seen.contains(&a) {
            continue;
        }
        seen.push(a);
        let idx: Vec<usize> = (0..alphas.len()).filter(|&i| alphas[i] == a).collect();
        if idx.is_empty() {
            continue;
        }
        let (ms, ss) = mean_std(&idx.iter().map(|&i| sensing[i]).collect::<Vec<_>>());
        let (mc, sc) = mean_std(&idx.iter().map(|&i| comm[i]).collect::<Vec<_>>());
        out.push(vec![
            hashes[idx[0]].to_string(),
            num(a),
            idx.len().to_string(),
            num(ms),
            num(ss),
            num(mc),
            num(sc),
        ]);
    }
    Ok(out)
}

pub fn run_gradcheck(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let ExperimentKind::Gradcheck {
        trials,
        fd_step,
        perturbation,
    } = cfg.experiment
    else {
        bail!("not a gradcheck config");
    };
    let hash = cfg.config_hash();
    let results: Vec<CellResult<GradientReport>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let started = Instant::now();
            let outcome = gradcheck_trial(cfg, t, fd_step, perturbation);
            let ms = vec![(0, started.elapsed().as_secs_f64() * 1e3)];
            CellResult {
                label: format!("trial={t}"),
                outcome,
                ms,
            }
        })
        .collect();

    let mut raw = Table::new(&GRADCHECK_RAW_COLUMNS);
    let mut timings = Table::new(&TIMING_COLUMNS);
    let mut failures = Vec::new();
    for (t, cell) in results.iter().enumerate() {
        timing_rows(&mut timings, &cell.label, &cell.ms);
        match &cell.outcome {
            Ok(rep) => {
                let s = rep.summary();
                raw.push(vec![
                    hash.clone(),
                    t.to_string(),
                    num(cfg.alpha),
                    num(s.rel_error),
                    num(s.analytic_norm),
                    num(s.fd_norm),
                ]);
            }
            Err(e) => failures.push(format!("{}: {e:#}", cell.label)),
        }
    }
    let aggregate = aggregate_gradcheck(&raw)?;
    let errors = raw.column_f64("rel_error")?;
    let threshold_breached = errors
        .iter()
        .any(|e| e.is_nan() || *e > GRADCHECK_THRESHOLD);
    Ok(RunRecord {
        experiment: "gradcheck".into(),
        config_hash: hash,
        base_seed: cfg.base_seed,
        raw,
        aggregate,
        timings,
        failures,
        threshold_breached,
    })
}

fn gradcheck_trial(
    cfg: &ExperimentConfig,
    t: usize,
    h: f64,
    perturbation: f64,
) -> Result<GradientReport> {
    let t = t as u64;
    let mean = sample_scenario(
        &cfg.scenario,
        &cfg.system,
        derive_seed(cfg.base_seed, "gradcheck-scenario", t),
    )?;
    let oc = cfg.objective_config(&mean, cfg.alpha)?;
    let ss = sample_prior(
        &mean,
        &cfg.scenario,
        cfg.optimizer.samples_per_iter,
        derive_seed(cfg.base_seed, "gradcheck-samples", t),
    )?;
    let w = random_point(
        cfg.system.n_tx,
        cfg.system.n_streams,
        cfg.system.power_budget,
        derive_seed(cfg.base_seed, "gradcheck-init", t),
    )?;
    let analytic =
        euclidean_gradient(w.matrix(), &ss, &oc)?.add_scalar(C64::new(perturbation, 0.0));
    let fd = fd_gradient(w.matrix(), &ss, &oc, h)?;
    Ok(GradientReport::new(analytic, fd))
}

/// One row with the trial count and the max and median relative error;
/// no rows when there were no trials.
pub fn aggregate_gradcheck(raw: &Table) -> Result<Table> {
    let errors = raw.column_f64("rel_error")?;
    let mut out = Table::new(&GRADCHECK_AGGREGATE_COLUMNS);
    if let Some(hash) = raw.column_str("config_hash")?.first() {
        let max = errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(vec![
            hash.to_string(),
            errors.len().to_string(),
            num(max),
            num(median(&errors)),
        ]);
    }
    Ok(out)
}
