//! Acceptance suite. Each test checks one criterion at its stated tolerance
//! and prints a single `PASS`/`FAIL` line before asserting.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::Instant;

use isac_experiments::output::{write_outputs, AGGREGATE_FILE, PLOT_FILE, RAW_FILE};
use isac_experiments::record::median;
use isac_experiments::runner::{
    optimize_run, optimizer_for_run, run_convergence, run_tradeoff, scenario_for_run,
    CONVERGENCE_AGGREGATE_COLUMNS, CONVERGENCE_RAW_COLUMNS,
};
use isac_experiments::{ExperimentConfig, ExperimentKind, GridDims, Table};
use isac_precoder::bfim::{
    assemble_bfim, conditional_fim_param, fim_param_block, fim_param_block_fixed_symbols,
    objective_comm, objective_sensing, ObjectiveConfig, SampleSet, SampledObjective,
};
use isac_precoder::gradient::gradient_report;
use isac_precoder::linalg::{logdet_hpd, re_inner};
use isac_precoder::manifold::{project_tangent, random_point, retract, Precoder};
use isac_precoder::optimizer::{kkt_report, run, OptimizerConfig};
use isac_precoder::sampler::{sample_prior, ScenarioSpec};
use isac_precoder::system::{received_mean, ChannelParams, ResourceElement, SystemConfig};
use isac_precoder::{CMat, CVec, RMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn report(name: &str, pass: bool, detail: String) {
    println!("{name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name} failed: {detail}");
}

/// N_t = N_r = 4, N_s = 2, L = 2, M = 8 (4 × 2 grid), α = 0.5, N = 4, 50 iterations.
fn smoke(experiment: ExperimentKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(experiment);
    cfg.system = SystemConfig::smoke();
    cfg.scenario = ScenarioSpec {
        path_count: 2,
        ..ScenarioSpec::default()
    };
    cfg.grid = GridDims {
        subcarriers: 4,
        symbols: 2,
    };
    cfg.optimizer = OptimizerConfig {
        max_iters: 50,
        samples_per_iter: 4,
        ..OptimizerConfig::default()
    };
    cfg.alpha = 0.5;
    cfg.monte_carlo_runs = 20;
    cfg.base_seed = 2024;
    cfg
}

fn smoke_objective(alpha: f64, run: usize) -> (ExperimentConfig, ObjectiveConfig, ChannelParams) {
    let cfg = smoke(ExperimentKind::Gradcheck {
        trials: 0,
        fd_step: 1e-6,
        perturbation: 0.0,
    });
    let mean = scenario_for_run(&cfg, run).unwrap();
    let oc = cfg.objective_config(&mean, alpha).unwrap();
    (cfg, oc, mean)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circularly symmetric `CN(0, I)` vector.
fn cn_vector(n: usize, rng: &mut ChaCha8Rng) -> CVec {
    CVec::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    })
}

fn uniform_cmat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Central-difference Jacobian of `μ = H(ξ)x`, with per-type steps.
fn fd_mean_jacobian(p: &ChannelParams, re: ResourceElement, x: &CVec, cfg: &SystemConfig) -> CMat {
    let xi = p.to_vector();
    let l = p.n_paths();
    let base = 1e-6;
    let steps: Vec<f64> = [
        base,
        base,
        base / cfg.subcarrier_spacing,
        base / cfg.symbol_duration,
        base,
        base,
    ]
    .iter()
    .flat_map(|&h| std::iter::repeat_n(h, l))
    .collect();
    let mut jac = CMat::zeros(cfg.n_rx, xi.len());
    for i in 0..xi.len() {
        let (mut up, mut dn) = (xi.clone(), xi.clone());
        up[i] += steps[i];
        dn[i] -= steps[i];
        let diff = received_mean(&ChannelParams::from_vector(&up).unwrap(), re, x, cfg)
            - received_mean(&ChannelParams::from_vector(&dn).unwrap(), re, x, cfg);
        jac.set_column(i, &(diff / C64::new(2.0 * steps[i], 0.0)));
    }
    jac
}

/// `log det` through LU after symmetric Jacobi scaling, independent of the
/// Cholesky route used by the library.
fn logdet_lu(m: &RMat) -> f64 {
    let d = m.diagonal().map(|v| 1.0 / v.sqrt());
    let scaled = RMat::from_fn(m.nrows(), m.ncols(), |i, j| d[i] * m[(i, j)] * d[j]);
    scaled.lu().determinant().ln() - 2.0 * d.iter().map(|v| v.ln()).sum::<f64>()
}

fn real_expansion(a: &CMat) -> RMat {
    let n = a.nrows();
    RMat::from_fn(2 * n, 2 * n, |i, j| {
        let z = a[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

#[test]
fn gradient_correctness() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        for alpha in [0.0, 0.5, 1.0] {
            let (cfg, oc, mean) = smoke_objective(alpha, seed);
            let ss = sample_prior(&mean, &cfg.scenario, 4, 10_000 + seed as u64).unwrap();
            let w = random_point(4, 2, 1.0, 20_000 + seed as u64).unwrap();
            let rep = gradient_report(w.matrix(), &ss, &oc, 1e-6).unwrap();
            worst = worst.max(rep.rel_error);
        }
    }
    let secs = started.elapsed().as_secs_f64();
    report(
        "gradient correctness",
        worst < 1e-6 && secs < 30.0,
        format!("max rel error {worst:.2e} < 1e-6 over 60 instances, {secs:.1}s < 30s"),
    );
}

#[test]
fn fim_closed_form_matches_jacobian_oracle() {
    let mut worst: f64 = 0.0;
    for t in 0..10u64 {
        let (cfg, _, mean) = smoke_objective(0.5, t as usize);
        let mut r = rng(300 + t);
        let xi = sample_prior(&mean, &cfg.scenario, 1, 400 + t)
            .unwrap()
            .samples
            .remove(0);
        let w = Precoder::normalized(uniform_cmat(4, 2, &mut r), 1.0).unwrap();
        let s = cn_vector(2, &mut r);
        let x = w.matrix() * s;
        let re = ResourceElement {
            subcarrier: r.random_range(0..4),
            symbol: r.random_range(0..2),
        };
        let jac = fd_mean_jacobian(&xi, re, &x, &cfg.system);
        let oracle: RMat = (jac.adjoint() * &jac).map(|z| z.re) * (2.0 / cfg.system.noise_power);
        let closed = conditional_fim_param(&x, &xi, re, &cfg.system).unwrap();
        worst = worst.max((&closed - &oracle).norm() / oracle.norm());
    }
    report(
        "FIM closed form vs Jacobian oracle",
        worst < 1e-5,
        format!("max rel Frobenius error {worst:.2e} < 1e-5"),
    );
}

#[test]
fn symbol_expectation_identity() {
    let (cfg, _, mean) = smoke_objective(0.5, 3);
    let xi = sample_prior(&mean, &cfg.scenario, 1, 77)
        .unwrap()
        .samples
        .remove(0);
    let w = random_point(4, 2, 1.0, 78).unwrap();
    let re = ResourceElement {
        subcarrier: 2,
        symbol: 1,
    };
    let draws = 100_000;
    let mut r = rng(79);
    let dim = xi.dim();
    let mut acc = RMat::zeros(dim, dim);
    for _ in 0..draws {
        let x = w.matrix() * cn_vector(2, &mut r);
        acc += fim_param_block_fixed_symbols(&x, &xi, re, &cfg.system).unwrap();
    }
    acc /= draws as f64;
    let exact = fim_param_block(w.matrix(), &xi, re, &cfg.system).unwrap();
    let err = (&acc - &exact).norm() / exact.norm();
    report(
        "symbol expectation identity",
        err < 0.02,
        format!("rel Frobenius error {err:.4} < 0.02 at 1e5 draws"),
    );
}

#[test]
fn logdet_block_decomposition() {
    let mut worst: f64 = 0.0;
    for t in 0..10 {
        let (cfg, oc, mean) = smoke_objective(0.5, t);
        let ss = sample_prior(&mean, &cfg.scenario, 3, 500 + t as u64).unwrap();
        let w = random_point(4, 2, 1.0, 600 + t as u64).unwrap();
        let dense = assemble_bfim(w.matrix(), &ss, &oc).unwrap().to_dense();
        let j_logdet: f64 = oc.weights.diag.iter().map(|v| v.ln()).sum();
        let blocks = objective_sensing(w.matrix(), &ss, &oc).unwrap() - 2.0 * j_logdet
            + objective_comm(w.matrix(), &ss, &oc).unwrap();
        worst = worst.max((logdet_lu(&dense) - blocks).abs());
    }
    report(
        "log-det block decomposition",
        worst < 1e-9,
        format!("max abs difference {worst:.2e} < 1e-9"),
    );
}

#[test]
fn real_block_collapse() {
    let mut worst: f64 = 0.0;
    let mut r = rng(11);
    for _ in 0..10 {
        let g = uniform_cmat(3, 4, &mut r) * C64::new(3.0, 0.0);
        let a = &g * g.adjoint();
        let shifted = &a + CMat::identity(3, 3) * C64::new(2.0, 0.0);
        let complex = 2.0 * logdet_hpd(&shifted, "A + 2I").unwrap();
        let real = logdet_lu(&real_expansion(&shifted));
        worst = worst.max((complex - real).abs());
    }
    report(
        "real-block collapse",
        worst < 1e-9,
        format!("max abs difference {worst:.2e} < 1e-9"),
    );
}

#[test]
fn jensen_bound() {
    let mut worst = f64::NEG_INFINITY;
    for t in 0..100u64 {
        let (cfg, oc, mean) = smoke_objective(0.0, (t % 10) as usize);
        let ss = sample_prior(&mean, &cfg.scenario, 5, 700 + t).unwrap();
        let w = random_point(4, 2, 1.0, 800 + t).unwrap();
        let per_sample: f64 = ss
            .samples
            .iter()
            .map(|s| {
                objective_comm(
                    w.matrix(),
                    &SampleSet::new(vec![s.clone()], 0).unwrap(),
                    &oc,
                )
                .unwrap()
            })
            .sum::<f64>()
            / ss.len() as f64;
        let averaged = objective_comm(w.matrix(), &ss, &oc).unwrap();
        worst = worst.max(per_sample - averaged);
    }
    report(
        "Jensen bound",
        worst <= 1e-12,
        format!("max excess {worst:.2e} <= 1e-12 over 100 sample sets"),
    );
}

#[test]
fn manifold_suite() {
    let mut r = rng(5);
    let (mut proj, mut feas, mut slope_ok) = (0.0f64, 0.0f64, true);
    for seed in 0..20u64 {
        let power = 0.5 + 2.0 * r.random::<f64>();
        let w = random_point(4, 2, power, seed).unwrap();
        let u = uniform_cmat(4, 2, &mut r);
        let v = uniform_cmat(4, 2, &mut r);
        let pu = project_tangent(&w, &u);
        let pv = project_tangent(&w, &v);
        let scale = u.norm() * v.norm();
        proj = proj
            .max((project_tangent(&w, pu.matrix()).matrix() - pu.matrix()).norm() / u.norm())
            .max(re_inner(w.matrix(), pu.matrix()).abs() / (u.norm() * w.matrix().norm()))
            .max((re_inner(pu.matrix(), &v) - re_inner(&u, pv.matrix())).abs() / scale);
        for step in [1e-6, 1e-4, 1e-2, 1.0, 1e2] {
            feas = feas.max(retract(&w, &pu, step).unwrap().feasibility_residual());
        }
        let err = |t: f64| {
            let moved = retract(&w, &pu, t).unwrap();
            ((moved.matrix() - w.matrix()) / C64::new(t, 0.0) - pu.matrix()).norm()
        };
        let ratio = err(1e-3) / err(1e-4);
        slope_ok &= err(1e-4) < 1e-3 * pu.norm() && (ratio - 10.0).abs() < 1.0;
    }
    report(
        "manifold suite",
        proj < 1e-12 && feas < 1e-10 && slope_ok,
        format!("projector residual {proj:.2e} < 1e-12, feasibility {feas:.2e} < 1e-10·P, first-order slope {slope_ok}"),
    );
}

#[test]
fn kkt_consistency() {
    let (cfg, oc, _) = smoke_objective(0.5, 0);
    let init = random_point(4, 2, 1.0, 1).unwrap();
    let opt = OptimizerConfig {
        max_iters: 200,
        ..optimizer_for_run(&cfg, 0, 4)
    };
    let out = run(&oc, &opt, init).unwrap();
    let eval_seed = 4242;
    let kkt = kkt_report(&out.precoder, &oc, 1000, eval_seed).unwrap();
    let ss = sample_prior(
        &scenario_for_run(&cfg, 0).unwrap(),
        &cfg.scenario,
        1000,
        eval_seed,
    )
    .unwrap();
    let g = SampledObjective::new(&ss, &oc)
        .unwrap()
        .gradient(out.precoder.matrix())
        .unwrap();
    let lambda = re_inner(out.precoder.matrix(), &g) / (2.0 * out.precoder.power());
    let lambda_err = (kkt.lambda - lambda).abs() / lambda.abs().max(1.0);
    report(
        "KKT consistency",
        kkt.stationarity_residual < 1e-2 && lambda_err < 1e-10,
        format!(
            "stationarity residual {:.3e} (limit 1e-2) at 1000 samples after 200 iterations, multiplier error {lambda_err:.1e} (limit 1e-10)",
            kkt.stationarity_residual
        ),
    );
}

#[test]
fn convergence_behavior() {
    // objective on a fixed evaluation set at iterations 0, 10 and 50
    let cfg = smoke(ExperimentKind::Convergence {
        n_list: vec![1, 10],
    });
    let mut ratios = Vec::new();
    for run_index in 0..20 {
        let mean = scenario_for_run(&cfg, run_index).unwrap();
        let oc = cfg.objective_config(&mean, cfg.alpha).unwrap();
        let eval = sample_prior(&mean, &cfg.scenario, 1000, 9000 + run_index as u64).unwrap();
        let obj = SampledObjective::new(&eval, &oc).unwrap();
        let at = |iters: usize| {
            let short = ExperimentConfig {
                optimizer: OptimizerConfig {
                    max_iters: iters,
                    ..cfg.optimizer.clone()
                },
                ..cfg.clone()
            };
            let (_, out) = optimize_run(&short, run_index, cfg.alpha, 4).unwrap();
            obj.value(out.precoder.matrix()).unwrap()
        };
        let (f0, f10, f50) = (at(0), at(10), at(50));
        ratios.push((f50 - f10) / (f50 - f0).abs());
    }
    let ratio = median(&ratios);

    let record = run_convergence(&cfg).unwrap();
    assert!(record.failures.is_empty());
    let raw = &record.raw;
    let (ns, iters, grads) = (
        raw.column_f64("n_samples").unwrap(),
        raw.column_f64("iter").unwrap(),
        raw.column_f64("grad_norm").unwrap(),
    );
    let last = cfg.optimizer.max_iters as f64 - 1.0;
    let final_norms = |n: f64| -> Vec<f64> {
        (0..ns.len())
            .filter(|&i| ns[i] == n && iters[i] == last)
            .map(|i| grads[i])
            .collect()
    };
    let (g1, g10) = (median(&final_norms(1.0)), median(&final_norms(10.0)));
    report(
        "convergence behavior",
        ratio < 0.05 && g10 < g1,
        format!("median late-gain ratio {ratio:.4} < 0.05; median final grad norm N=10 {g10:.3e} < N=1 {g1:.3e}"),
    );
}

#[test]
fn tradeoff_endpoints() {
    let cfg = smoke(ExperimentKind::Tradeoff {
        alpha_list: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        eval_samples: 100,
    });
    let record = run_tradeoff(&cfg).unwrap();
    assert!(record.failures.is_empty());
    let agg = &record.aggregate;
    let col = |name: &str| agg.column_f64(name).unwrap();
    let (alpha, runs) = (col("alpha"), col("runs"));
    let (ms, ss, mc, sc) = (
        col("mean_sensing"),
        col("std_sensing"),
        col("mean_comm"),
        col("std_comm"),
    );
    let i0 = alpha.iter().position(|a| *a == 0.0).unwrap();
    let i1 = alpha.iter().position(|a| *a == 1.0).unwrap();
    let pooled = |s: &[f64]| (s[i0] * s[i0] / runs[i0] + s[i1] * s[i1] / runs[i1]).sqrt();
    let (ds, se_s) = (ms[i1] - ms[i0], pooled(&ss));
    let (dc, se_c) = (mc[i0] - mc[i1], pooled(&sc));
    report(
        "trade-off endpoints",
        ds > se_s && dc > se_c,
        format!("f_s(α=1) − f_s(α=0) = {ds:.3} > SE {se_s:.3}; f_c(α=0) − f_c(α=1) = {dc:.3} > SE {se_c:.3}"),
    );
}

#[test]
fn full_scale_smoke() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Convergence { n_list: vec![10] });
    cfg.system = SystemConfig::full_scale();
    cfg.scenario = ScenarioSpec::default();
    cfg.grid = GridDims {
        subcarriers: 128,
        symbols: 14,
    };
    cfg.optimizer = OptimizerConfig {
        max_iters: 50,
        samples_per_iter: 10,
        ..OptimizerConfig::default()
    };
    cfg.monte_carlo_runs = 1;
    cfg.base_seed = 11;

    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    let mut secs: f64 = 0.0;
    for rep in 0..2 {
        let started = Instant::now();
        let record = run_convergence(&cfg).unwrap();
        secs = secs.max(started.elapsed().as_secs_f64());
        assert!(record.failures.is_empty());
        let root = dir.path().join(format!("rep{rep}"));
        let run_dir = write_outputs(&record, &cfg, &root, None, 0.0).unwrap();
        let read = |f: &str| std::fs::read(run_dir.join(f)).unwrap();
        outputs.push((read(RAW_FILE), read(AGGREGATE_FILE), read(PLOT_FILE)));
    }
    let identical = outputs[0] == outputs[1];

    let raw = Table::parse_csv(std::str::from_utf8(&outputs[0].0).unwrap()).unwrap();
    let agg = Table::parse_csv(std::str::from_utf8(&outputs[0].1).unwrap()).unwrap();
    let svg = std::str::from_utf8(&outputs[0].2).unwrap();
    let numeric_ok = ["objective", "grad_norm", "step"]
        .iter()
        .all(|c| raw.column_f64(c).unwrap().iter().all(|v| v.is_finite()))
        && agg
            .column_f64("mean_neg_objective")
            .unwrap()
            .iter()
            .all(|v| v.is_finite());
    let schema_ok = raw.columns == CONVERGENCE_RAW_COLUMNS
        && agg.columns == CONVERGENCE_AGGREGATE_COLUMNS
        && raw.rows.len() == 50
        && agg.rows.len() == 50
        && numeric_ok
        && svg.starts_with("<svg")
        && svg.trim_end().ends_with("</svg>")
        && svg.contains("<polyline");
    report(
        "full-scale smoke",
        secs < 600.0 && schema_ok && identical,
        format!("single run {secs:.1}s < 600s, schema valid {schema_ok}, byte-identical rerun {identical}"),
    );
}
