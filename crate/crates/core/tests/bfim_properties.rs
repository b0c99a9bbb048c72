//! Log-determinant identities and invariances of the BFIM objectives.

mod common;

use common::{random_cmat, smoke_instance};
use isac_precoder::bfim::{
    assemble_bfim, bcrb, channel_gram_avg, objective, objective_comm, objective_sensing, SampleSet,
    SampledObjective, WeightMatrix,
};
use isac_precoder::manifold::random_point;
use isac_precoder::system::SystemConfig;
use isac_precoder::{CMat, RMat, C64};
use nalgebra::SymmetricEigen;

fn real_logdet_lu(m: &RMat) -> f64 {
    m.clone().lu().determinant().ln()
}

fn real_expansion(a: &CMat) -> RMat {
    let n = a.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            out[(i, j)] = v.re;
            out[(n + i, n + j)] = v.re;
            out[(i, n + j)] = -v.im;
            out[(n + i, j)] = v.im;
        }
    }
    out
}

#[test]
fn assembled_logdet_is_block_sum() {
    for seed in 0..10 {
        let (oc, ss) = smoke_instance(0.5, seed, 3);
        let w = random_point(4, 2, 1.0, 40 + seed).unwrap();
        let bfim = assemble_bfim(w.matrix(), &ss, &oc).unwrap();
        // Jacobi-equilibrate the dense matrix (entries span ~20 orders of
        // magnitude), then take the LU determinant of the whole thing.
        let dense = bfim.to_dense();
        let d = dense.diagonal().map(|v| 1.0 / v.sqrt());
        let scaled = RMat::from_fn(dense.nrows(), dense.ncols(), |i, j| {
            d[i] * dense[(i, j)] * d[j]
        });
        let dense_logdet = real_logdet_lu(&scaled) - 2.0 * d.iter().map(|v| v.ln()).sum::<f64>();
        let block_sum = bfim.as_block_diagonal().logdet().unwrap();
        assert!(
            (dense_logdet - block_sum).abs() < 1e-9,
            "seed {seed}: {dense_logdet} vs {block_sum}"
        );
    }
}

#[test]
fn symbol_blocks_collapse_to_complex_logdet() {
    let (oc, ss) = smoke_instance(0.0, 2, 5);
    let w = random_point(4, 2, 1.0, 7).unwrap();
    let bfim = assemble_bfim(w.matrix(), &ss, &oc).unwrap();
    let c = 2.0 / oc.system.noise_power;
    let fc = objective_comm(w.matrix(), &ss, &oc).unwrap();
    let blocks: f64 = bfim.symbol_blocks.iter().map(real_logdet_lu).sum();
    assert!((fc - blocks).abs() < 1e-9, "{fc} vs {blocks}");
    for (re, block) in oc.grid.elements().iter().zip(&bfim.symbol_blocks) {
        let k = channel_gram_avg(&ss, *re, &oc.system).unwrap();
        let a = w.matrix().adjoint() * k * w.matrix() * C64::new(c, 0.0);
        let two = CMat::identity(2, 2) * C64::new(2.0, 0.0);
        let expected = 2.0 * (a + two).determinant().re.ln();
        assert!((real_logdet_lu(block) - expected).abs() < 1e-9);
    }
}

#[test]
fn real_block_collapse_on_random_psd() {
    for seed in 0..10 {
        let g = random_cmat(3, 5, seed);
        let a = &g * g.adjoint();
        let shifted = &a + CMat::identity(3, 3) * C64::new(2.0, 0.0);
        let complex = 2.0 * shifted.determinant().re.ln();
        let real = real_logdet_lu(&real_expansion(&shifted));
        assert!((complex - real).abs() < 1e-9);
    }
}

#[test]
fn per_sample_rate_is_below_averaged_gram_rate() {
    for seed in 0..100u64 {
        let (oc, ss) = smoke_instance(0.0, seed % 7, 5);
        let w = random_point(4, 2, 1.0, seed).unwrap();
        let mean_of_logdets: f64 = ss
            .samples
            .iter()
            .map(|s| {
                let one = SampleSet::new(vec![s.clone()], 0).unwrap();
                objective_comm(w.matrix(), &one, &oc).unwrap()
            })
            .sum::<f64>()
            / ss.len() as f64;
        let averaged = objective_comm(w.matrix(), &ss, &oc).unwrap();
        assert!(
            mean_of_logdets <= averaged + 1e-12,
            "seed {seed}: {mean_of_logdets} > {averaged}"
        );
    }
}

#[test]
fn comm_objective_is_unitarily_invariant() {
    let (oc, ss) = smoke_instance(0.0, 5, 4);
    let w = random_point(4, 2, 1.0, 3).unwrap();
    let q = random_cmat(2, 2, 9).qr().q();
    let rotated = w.matrix() * &q;
    let a = objective_comm(w.matrix(), &ss, &oc).unwrap();
    let b = objective_comm(&rotated, &ss, &oc).unwrap();
    assert!((a - b).abs() < 1e-10 * a.abs());
}

#[test]
fn objectives_depend_on_w_over_sigma() {
    let (oc, ss) = smoke_instance(0.5, 6, 4);
    let w = random_point(4, 2, 1.0, 4).unwrap();
    let t = 3.0;
    let mut scaled = oc.clone();
    scaled.system = SystemConfig {
        noise_power: t * t * oc.system.noise_power,
        ..oc.system.clone()
    };
    let tw = w.matrix() * C64::new(t, 0.0);
    let a = objective(w.matrix(), &ss, &oc).unwrap();
    let b = objective(&tw, &ss, &scaled).unwrap();
    assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
}

#[test]
fn sensing_objective_matches_eigenvalues() {
    let (oc, ss) = smoke_instance(1.0, 8, 4);
    let w = random_point(4, 2, 1.0, 5).unwrap();
    let bfim = assemble_bfim(w.matrix(), &ss, &oc).unwrap();
    let d = &oc.weights.diag;
    let f = &bfim.xi_block;
    let jfj = RMat::from_fn(f.nrows(), f.ncols(), |i, j| d[i] * f[(i, j)] * d[j]);
    let eig = SymmetricEigen::new(jfj).eigenvalues;
    assert!(eig.iter().all(|v| *v > 0.0));
    let oracle: f64 = eig.iter().map(|v| v.ln()).sum();
    let fs = objective_sensing(w.matrix(), &ss, &oc).unwrap();
    assert!(
        (fs - oracle).abs() < 1e-8 * oracle.abs().max(1.0),
        "{fs} vs {oracle}"
    );
    let fast = SampledObjective::new(&ss, &oc)
        .unwrap()
        .sensing(w.matrix())
        .unwrap();
    assert!((fast - oracle).abs() < 1e-8 * oracle.abs().max(1.0));
}

#[test]
fn weight_scaling_shifts_sensing_objective() {
    let (oc, ss) = smoke_instance(1.0, 9, 4);
    let w = random_point(4, 2, 1.0, 6).unwrap();
    let c = 1.7;
    let mut scaled = oc.clone();
    scaled.weights = WeightMatrix::new(oc.weights.diag.iter().map(|v| v * c).collect()).unwrap();
    let l = oc.prior.dim() / 6;
    let a = objective_sensing(w.matrix(), &ss, &oc).unwrap();
    let b = objective_sensing(w.matrix(), &ss, &scaled).unwrap();
    assert!((b - a - 12.0 * l as f64 * c.ln()).abs() < 1e-9);
}

#[test]
fn bcrb_matches_dense_inverse() {
    for seed in 0..5 {
        let (oc, ss) = smoke_instance(0.5, 10 + seed, 3);
        let w = random_point(4, 2, 1.0, 8 + seed).unwrap();
        let bfim = assemble_bfim(w.matrix(), &ss, &oc).unwrap();
        let dense = bfim.to_dense();
        // A⁻¹ = D (DAD)⁻¹ D with Jacobi scaling D, inverted densely by LU
        let d = RMat::from_diagonal(&dense.diagonal().map(|v| 1.0 / v.sqrt()));
        let oracle = &d * (&d * &dense * &d).lu().try_inverse().unwrap() * &d;
        let blockwise = bcrb(&bfim).unwrap().to_dense();
        let err = (&blockwise - &oracle).norm() / oracle.norm();
        assert!(err < 1e-9, "seed {seed}: rel error {err}");
    }
}
