#![allow(dead_code)]

use isac_precoder::bfim::{ObjectiveConfig, SampleSet};
use isac_precoder::sampler::{default_weight_matrix, sample_prior, sample_scenario, ScenarioSpec};
use isac_precoder::system::{resource_grid, ChannelParams, SystemConfig};
use isac_precoder::{CMat, CVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// N_t = N_r = 4, N_s = 2, L = 2, M = 8 (4 subcarriers × 2 symbols).
pub fn smoke_config(
    alpha: f64,
    scenario_seed: u64,
) -> (ObjectiveConfig, ScenarioSpec, ChannelParams) {
    let system = SystemConfig::smoke();
    let spec = ScenarioSpec {
        path_count: 2,
        ..ScenarioSpec::default()
    };
    let mean = sample_scenario(&spec, &system, scenario_seed).unwrap();
    let oc = ObjectiveConfig {
        alpha,
        prior: spec.prior_for(&mean).unwrap(),
        weights: default_weight_matrix(2, system.subcarrier_spacing),
        system,
        grid: resource_grid(4, 2).unwrap(),
    };
    (oc, spec, mean)
}

pub fn smoke_instance(alpha: f64, seed: u64, n: usize) -> (ObjectiveConfig, SampleSet) {
    let (oc, spec, mean) = smoke_config(alpha, seed);
    let ss = sample_prior(&mean, &spec, n, seed.wrapping_add(1000)).unwrap();
    (oc, ss)
}

pub fn random_cmat(rows: usize, cols: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_cvec(n: usize, seed: u64) -> CVec {
    random_cmat(n, 1, seed).column(0).into_owned()
}
