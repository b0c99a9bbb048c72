//! Stochastic Riemannian gradient ascent (SRGD) and its conjugate-gradient
//! variant (SRCG) on the power sphere.
//!
//! Every iteration draws a fresh sample set from the prior, seeded by
//! `derive_seed(seed, "iteration", t)`, and evaluates objective, gradient and
//! all line-search trials on that same set.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bfim::{ObjectiveConfig, SampledObjective};
use crate::linalg::re_inner;
use crate::manifold::{retract, riemannian_gradient, transport, Precoder, TangentVector};
use crate::sampler::sample_from_prior;
use crate::seed::derive_seed;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Srgd,
    Srcg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepRule {
    AdaptiveLinesearch,
    /// `γ_t = a / (b + t + 1)` for iteration `t = 0, 1, …`.
    Diminishing {
        a: f64,
        b: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineSearchParams {
    pub initial_step: f64,
    pub contraction: f64,
    pub sufficient_increase: f64,
    pub max_backtracks: usize,
    /// Applied to the next initial step when a step is accepted without backtracking.
    pub growth: f64,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            contraction: 0.5,
            sufficient_increase: 1e-4,
            max_backtracks: 25,
            growth: 2.0,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_step > 0.0
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.sufficient_increase > 0.0
            && self.sufficient_increase < 1.0
            && self.growth >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid line-search parameters {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iters: usize,
    pub samples_per_iter: usize,
    pub step_rule: StepRule,
    pub line_search: LineSearchParams,
    /// Stop once the Riemannian gradient norm drops below this value.
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Srcg,
            max_iters: 50,
            samples_per_iter: 10,
            step_rule: StepRule::AdaptiveLinesearch,
            line_search: LineSearchParams::default(),
            grad_tol: 0.0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_iter == 0 {
            return Err(Error::InvalidConfig(
                "samples_per_iter must be at least 1".into(),
            ));
        }
        if self.grad_tol.is_nan() || self.grad_tol < 0.0 {
            return Err(Error::InvalidConfig("grad_tol must be non-negative".into()));
        }
        self.line_search.validate()?;
        if let StepRule::Diminishing { a, b } = self.step_rule {
            validate_schedule(Schedule::Harmonic { a, b }, 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// `f̂(W_t)` on this iteration's sample set.
    pub objective: f64,
    /// `f̂(W_{t+1})` on the same sample set.
    pub objective_after: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub backtracks: usize,
    /// The line search ran out of backtracks without sufficient increase.
    pub exhausted: bool,
    pub sample_seed: u64,
    pub ms: f64,
}

impl IterationRecord {
    /// The accepted step did not decrease the sampled objective.
    pub fn is_non_decreasing(&self) -> bool {
        self.objective_after >= self.objective
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// CSV with columns `iter,objective,grad_norm,step,backtracks,ms`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,objective,grad_norm,step,backtracks,ms\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.iter, r.objective, r.grad_norm, r.step, r.backtracks, r.ms
            );
        }
        out
    }

    /// Same as [`to_csv`](Self::to_csv) without the wall-clock column, so the
    /// output depends only on configuration and seeds.
    pub fn to_csv_deterministic(&self) -> String {
        let mut out = String::from("iter,objective,grad_norm,step,backtracks\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.iter, r.objective, r.grad_norm, r.step, r.backtracks
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub precoder: Precoder,
    pub trace: IterationTrace,
}

/// An aborted run: the error plus everything recorded before it.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub trace: IterationTrace,
    pub last_precoder: Precoder,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "optimization aborted after {} iterations: {}",
            self.trace.len(),
            self.error
        )
    }
}

impl std::error::Error for RunFailure {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOutcome {
    pub step: f64,
    pub value: f64,
    pub backtracks: usize,
    pub exhausted: bool,
    /// Initial step for the next call.
    pub next_initial_step: f64,
}

/// Backtracking search for sufficient increase
/// `φ(t) ≥ φ(0) + c₁ t · slope`, where `slope > 0` is the directional
/// derivative at `t = 0`. On exhaustion the best trial is returned.
pub fn line_search<F>(
    mut phi: F,
    f0: f64,
    slope: f64,
    params: &LineSearchParams,
    initial_step: f64,
) -> Result<LineSearchOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut step = initial_step;
    let mut best = (f64::NEG_INFINITY, step);
    for backtracks in 0..=params.max_backtracks {
        let value = phi(step)?;
        if value >= f0 + params.sufficient_increase * step * slope {
            let next_initial_step = if backtracks == 0 {
                step * params.growth
            } else {
                step
            };
            return Ok(LineSearchOutcome {
                step,
                value,
                backtracks,
                exhausted: false,
                next_initial_step,
            });
        }
        // ties go to the smaller step
        if value >= best.0 {
            best = (value, step);
        }
        if backtracks < params.max_backtracks {
            step *= params.contraction;
        }
    }
    let (value, step) = best;
    Ok(LineSearchOutcome {
        step,
        value,
        backtracks: params.max_backtracks,
        exhausted: true,
        next_initial_step: step,
    })
}

/// Previous search direction and gradient for the conjugate-gradient update.
#[derive(Debug, Clone)]
pub struct CgState {
    pub direction: TangentVector,
    pub gradient: TangentVector,
}

/// `g + β T(d_prev)` with Polak-Ribière `β = max(0, ⟨g, g − T(g_prev)⟩ / ‖g_prev‖²)`,
/// falling back to `g` when the result is not an ascent direction.
pub fn srcg_direction(prev: Option<&CgState>, grad_now: &TangentVector) -> TangentVector {
    let Some(prev) = prev else {
        return grad_now.clone();
    };
    let w_prev = prev.gradient.base();
    let w_now = grad_now.base();
    let denom = prev.gradient.inner(&prev.gradient);
    if denom <= 0.0 {
        return grad_now.clone();
    }
    let g_prev = transport(w_prev, w_now, &prev.gradient);
    let d_prev = transport(w_prev, w_now, &prev.direction);
    let beta = (grad_now.inner(grad_now) - grad_now.inner(&g_prev)) / denom;
    let beta = beta.max(0.0);
    let dir = grad_now.add(&d_prev.scaled(beta));
    if dir.inner(grad_now) > 0.0 {
        dir
    } else {
        grad_now.clone()
    }
}

/// Runs the optimizer from `init`.
pub fn run(
    oc: &ObjectiveConfig,
    opt: &OptimizerConfig,
    init: Precoder,
) -> std::result::Result<RunOutput, RunFailure> {
    let mut trace = IterationTrace::default();
    let mut w = init;
    let fail = |error: Error, trace: IterationTrace, w: Precoder| RunFailure {
        error,
        trace,
        last_precoder: w,
    };
    if let Err(e) = oc.validate().and_then(|_| opt.validate()) {
        return Err(fail(e, trace, w));
    }
    if (w.power() - oc.system.power_budget).abs() > 1e-12 * oc.system.power_budget {
        let e = Error::InvalidConfig("initial precoder power differs from the power budget".into());
        return Err(fail(e, trace, w));
    }

    let mut initial_step = opt.line_search.initial_step;
    let mut cg: Option<CgState> = None;
    for t in 0..opt.max_iters {
        let started = Instant::now();
        let sample_seed = derive_seed(opt.seed, "iteration", t as u64);
        let step_result = iterate(oc, opt, &w, t, sample_seed, &mut initial_step, &mut cg);
        match step_result {
            Ok(None) => break,
            Ok(Some((next, mut record))) => {
                record.ms = started.elapsed().as_secs_f64() * 1e3;
                trace.records.push(record);
                w = next;
            }
            Err(e) => return Err(fail(e, trace, w)),
        }
    }
    Ok(RunOutput { precoder: w, trace })
}

fn iterate(
    oc: &ObjectiveConfig,
    opt: &OptimizerConfig,
    w: &Precoder,
    t: usize,
    sample_seed: u64,
    initial_step: &mut f64,
    cg: &mut Option<CgState>,
) -> Result<Option<(Precoder, IterationRecord)>> {
    let ss = sample_from_prior(&oc.prior, opt.samples_per_iter, sample_seed)?;
    let obj = SampledObjective::new(&ss, oc)?;
    let (eval, egrad) = obj.value_and_gradient(w.matrix())?;
    let rgrad = riemannian_gradient(w, &egrad);
    let grad_norm = rgrad.norm();
    if grad_norm < opt.grad_tol {
        return Ok(None);
    }
    let dir = match opt.method {
        Method::Srgd => rgrad.clone(),
        Method::Srcg => srcg_direction(cg.as_ref(), &rgrad),
    };
    // d/dt f(R(W, tD)) at t = 0 under the Wirtinger convention
    let slope = 2.0 * re_inner(rgrad.matrix(), dir.matrix());
    let mut phi = |s: f64| obj.value(retract(w, &dir, s)?.matrix());
    let (step, value_after, backtracks, exhausted) = match opt.step_rule {
        StepRule::AdaptiveLinesearch => {
            let ls = line_search(&mut phi, eval.value, slope, &opt.line_search, *initial_step)?;
            *initial_step = ls.next_initial_step;
            (ls.step, ls.value, ls.backtracks, ls.exhausted)
        }
        StepRule::Diminishing { a, b } => {
            let step = a / (b + t as f64 + 1.0);
            (step, phi(step)?, 0, false)
        }
    };
    let next = retract(w, &dir, step)?;
    if opt.method == Method::Srcg {
        *cg = Some(CgState {
            direction: dir,
            gradient: rgrad,
        });
    }
    let record = IterationRecord {
        iter: t,
        objective: eval.value,
        objective_after: value_after,
        grad_norm,
        step,
        backtracks,
        exhausted,
        sample_seed,
        ms: 0.0,
    };
    Ok(Some((next, record)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktReport {
    pub lambda: f64,
    /// `‖∇f − 2λW‖_F / max(‖∇f‖_F, ε)`.
    pub stationarity_residual: f64,
    /// `|tr(WWᴴ) − P| / P`.
    pub feasibility_residual: f64,
}

/// First-order optimality diagnostics on a fixed evaluation sample set.
///
/// The multiplier is `λ = Re tr(Wᴴ∇f) / (2P)`, which makes `∇f − 2λW` the
/// tangent projection of `∇f`.
pub fn kkt_report(
    w: &Precoder,
    oc: &ObjectiveConfig,
    eval_sample_count: usize,
    seed: u64,
) -> Result<KktReport> {
    let ss = sample_from_prior(&oc.prior, eval_sample_count, seed)?;
    let egrad = SampledObjective::new(&ss, oc)?.gradient(w.matrix())?;
    Ok(kkt_from_gradient(w, &egrad))
}

pub fn kkt_from_gradient(w: &Precoder, egrad: &crate::CMat) -> KktReport {
    let lambda = re_inner(w.matrix(), egrad) / (2.0 * w.power());
    let residual = egrad - w.matrix() * C64::new(2.0 * lambda, 0.0);
    KktReport {
        lambda,
        stationarity_residual: residual.norm() / egrad.norm().max(crate::gradient::REL_ERROR_EPS),
        feasibility_residual: w.feasibility_residual(),
    }
}

/// Step-size schedules that can be checked against the summability conditions
/// `Σγ_t = ∞`, `Σγ_t² < ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// `γ_t = a / (b + t)`, `t = 1, 2, …`.
    Harmonic {
        a: f64,
        b: f64,
    },
    Constant {
        gamma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleDiagnostics {
    pub horizon: usize,
    pub partial_sum: f64,
    pub partial_sum_sq: f64,
}

/// Accepts harmonic schedules with `a > 0, b ≥ 0` and reports partial sums
/// over `horizon` terms. Constant schedules are rejected since their squares
/// are not summable.
pub fn validate_schedule(schedule: Schedule, horizon: usize) -> Result<ScheduleDiagnostics> {
    match schedule {
        Schedule::Constant { gamma } => Err(Error::InvalidSchedule(format!(
            "constant step {gamma} has a divergent sum of squares"
        ))),
        Schedule::Harmonic { a, b } => {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidSchedule(format!(
                    "numerator a must be positive, got {a}"
                )));
            }
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::InvalidSchedule(format!(
                    "offset b must be non-negative, got {b}"
                )));
            }
            let (mut s, mut s2) = (0.0, 0.0);
            // summed from the smallest term up for accuracy
            for t in (1..=horizon).rev() {
                let g = a / (b + t as f64);
                s += g;
                s2 += g * g;
            }
            Ok(ScheduleDiagnostics {
                horizon,
                partial_sum: s,
                partial_sum_sq: s2,
            })
        }
    }
}
