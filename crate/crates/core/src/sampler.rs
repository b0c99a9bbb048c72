//! Scenario and prior sampling.
//!
//! A scenario draws `L` independent paths: complex standard normal gains,
//! distances and speeds uniform in their ranges (converted to delays and
//! Doppler shifts), and angles uniform in the angle range. The scenario is
//! then used as the prior mean, with per-type standard deviations for the
//! Gaussian prior.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bfim::{PriorSpec, SampleSet, WeightMatrix};
use crate::seed::rng_from_seed;
use crate::system::{ChannelParams, SystemConfig, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// Prior standard deviations per parameter type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorStd {
    /// Applied to both the real and imaginary gain parts.
    pub gain: f64,
    /// Seconds.
    pub delay: f64,
    /// Hz.
    pub doppler: f64,
    /// Radians, used for both AoD and AoA.
    pub angle: f64,
}

impl Default for PriorStd {
    fn default() -> Self {
        Self {
            gain: 0.1,
            delay: 1e-7,
            doppler: 50.0,
            angle: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSpec {
    pub path_count: usize,
    /// Path length range in meters.
    pub distance_range: (f64, f64),
    /// Relative speed range in m/s.
    pub speed_range: (f64, f64),
    /// AoD/AoA range in radians.
    pub angle_range: (f64, f64),
    pub prior_std: PriorStd,
    /// Use the round-trip Doppler `2 v f_c / c` instead of `v f_c / c`.
    pub two_way_doppler: bool,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        let half_pi = std::f64::consts::FRAC_PI_2;
        Self {
            path_count: 3,
            distance_range: (10.0, 800.0),
            speed_range: (0.0, 80.0),
            angle_range: (-half_pi, half_pi),
            prior_std: PriorStd::default(),
            two_way_doppler: false,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.path_count == 0 {
            return Err(Error::InvalidConfig("path_count must be at least 1".into()));
        }
        for (name, (lo, hi)) in [
            ("distance_range", self.distance_range),
            ("speed_range", self.speed_range),
            ("angle_range", self.angle_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must satisfy lo <= hi, got ({lo}, {hi})"
                )));
            }
        }
        if self.distance_range.0 < 0.0 {
            return Err(Error::InvalidConfig(
                "distances must be non-negative".into(),
            ));
        }
        let s = self.prior_std;
        if [s.gain, s.delay, s.doppler, s.angle]
            .iter()
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(Error::InvalidConfig(
                "prior standard deviations must be positive".into(),
            ));
        }
        Ok(())
    }

    fn doppler_factor(&self, cfg: &SystemConfig) -> f64 {
        let one_way = cfg.carrier_freq / SPEED_OF_LIGHT;
        if self.two_way_doppler {
            2.0 * one_way
        } else {
            one_way
        }
    }

    /// Standard deviations in the stacked parameter order.
    pub fn prior_std_vector(&self, l: usize) -> Vec<f64> {
        let s = self.prior_std;
        [s.gain, s.gain, s.delay, s.doppler, s.angle, s.angle]
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, l))
            .collect()
    }

    /// Gaussian prior centred at `mean` with this spec's deviations.
    pub fn prior_for(&self, mean: &ChannelParams) -> Result<PriorSpec> {
        self.validate()?;
        let cov = self
            .prior_std_vector(mean.n_paths())
            .iter()
            .map(|s| s * s)
            .collect();
        PriorSpec::new(mean.to_vector(), cov)
    }
}

/// A scenario together with the physical quantities it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDraw {
    pub params: ChannelParams,
    pub distances: Vec<f64>,
    pub speeds: Vec<f64>,
}

pub fn sample_scenario_draw(
    spec: &ScenarioSpec,
    cfg: &SystemConfig,
    seed: u64,
) -> Result<ScenarioDraw> {
    spec.validate()?;
    cfg.validate()?;
    let l = spec.path_count;
    let mut rng = rng_from_seed(seed);
    let mut uniform = |(lo, hi): (f64, f64)| {
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        }
    };
    let distances: Vec<f64> = (0..l).map(|_| uniform(spec.distance_range)).collect();
    let speeds: Vec<f64> = (0..l).map(|_| uniform(spec.speed_range)).collect();
    let aod: Vec<f64> = (0..l).map(|_| uniform(spec.angle_range)).collect();
    let aoa: Vec<f64> = (0..l).map(|_| uniform(spec.angle_range)).collect();
    let gains_scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut gains_re = Vec::with_capacity(l);
    let mut gains_im = Vec::with_capacity(l);
    for _ in 0..l {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        gains_re.push(gains_scale * re);
        gains_im.push(gains_scale * im);
    }
    let delays = distances.iter().map(|d| d / SPEED_OF_LIGHT).collect();
    let factor = spec.doppler_factor(cfg);
    let dopplers = speeds.iter().map(|v| v * factor).collect();
    let params = ChannelParams::new(gains_re, gains_im, delays, dopplers, aod, aoa)?;
    Ok(ScenarioDraw {
        params,
        distances,
        speeds,
    })
}

/// Ground-truth channel parameters for one scenario, deterministic in `seed`.
pub fn sample_scenario(
    spec: &ScenarioSpec,
    cfg: &SystemConfig,
    seed: u64,
) -> Result<ChannelParams> {
    Ok(sample_scenario_draw(spec, cfg, seed)?.params)
}

/// Draws `n` parameter vectors from `N(mean, diag(cov))`, componentwise.
pub fn sample_from_prior(prior: &PriorSpec, n: usize, seed: u64) -> Result<SampleSet> {
    prior.validate()?;
    if n == 0 {
        return Err(Error::EmptySampleSet);
    }
    let mut rng = rng_from_seed(seed);
    let stds: Vec<f64> = prior.cov_diag.iter().map(|v| v.sqrt()).collect();
    let samples = (0..n)
        .map(|_| {
            let xi: Vec<f64> = prior
                .mean
                .iter()
                .zip(&stds)
                .map(|(&mu, &sd)| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    mu + sd * z
                })
                .collect();
            ChannelParams::from_vector(&xi)
        })
        .collect::<Result<Vec<_>>>()?;
    SampleSet::new(samples, seed)
}

/// Prior samples around `mean` using the spec's standard deviations.
pub fn sample_prior(
    mean: &ChannelParams,
    spec: &ScenarioSpec,
    n: usize,
    seed: u64,
) -> Result<SampleSet> {
    sample_from_prior(&spec.prior_for(mean)?, n, seed)
}

/// `J = diag(1, 1, 1/f₀, f₀, 1, 1)` with each entry repeated per path.
pub fn default_weight_matrix(l_paths: usize, f0: f64) -> WeightMatrix {
    let diag = [1.0, 1.0, 1.0 / f0, f0, 1.0, 1.0]
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, l_paths))
        .collect();
    WeightMatrix { diag }
}
