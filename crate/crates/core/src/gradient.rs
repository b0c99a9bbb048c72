//! Euclidean gradient of the sampled objective and a finite-difference oracle.
//!
//! Convention: for a real `f`, the gradient is the Wirtinger derivative
//! `G = ∂f/∂W*`, so that `f(W + Δ) = f(W) + 2 Re tr(GᴴΔ) + o(‖Δ‖)`.

use serde::Serialize;

use crate::bfim::{ObjectiveConfig, SampleSet, SampledObjective};
use crate::{CMat, Result, C64};

/// Floor on the denominator of the relative error.
pub const REL_ERROR_EPS: f64 = 1e-30;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GradientReport {
    pub analytic: CMat,
    pub fd: CMat,
    pub rel_error: f64,
}

/// Scalar summary of a [`GradientReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientSummary {
    pub rel_error: f64,
    pub analytic_norm: f64,
    pub fd_norm: f64,
}

impl GradientReport {
    pub fn new(analytic: CMat, fd: CMat) -> Self {
        let rel_error = relative_error(&analytic, &fd);
        Self {
            analytic,
            fd,
            rel_error,
        }
    }

    pub fn summary(&self) -> GradientSummary {
        GradientSummary {
            rel_error: self.rel_error,
            analytic_norm: self.analytic.norm(),
            fd_norm: self.fd.norm(),
        }
    }
}

/// `‖a − b‖_F / max(‖b‖_F, ε)`.
pub fn relative_error(a: &CMat, reference: &CMat) -> f64 {
    (a - reference).norm() / reference.norm().max(REL_ERROR_EPS)
}

/// Analytic `∂f̂/∂W*` on the given sample set.
pub fn euclidean_gradient(w: &CMat, ss: &SampleSet, oc: &ObjectiveConfig) -> Result<CMat> {
    SampledObjective::new(ss, oc)?.gradient(w)
}

/// Central differences of an arbitrary real function of `W`, assembled as
/// `G_pq = ½(∂f/∂Re W_pq + j ∂f/∂Im W_pq)`.
pub fn fd_gradient_of<F>(f: F, w: &CMat, h: f64) -> Result<CMat>
where
    F: Fn(&CMat) -> Result<f64>,
{
    let mut g = CMat::zeros(w.nrows(), w.ncols());
    let mut probe = w.clone();
    for idx in 0..w.len() {
        let orig = probe[idx];
        let mut partial = |delta: C64| -> Result<f64> {
            probe[idx] = orig + delta;
            let plus = f(&probe)?;
            probe[idx] = orig - delta;
            let minus = f(&probe)?;
            probe[idx] = orig;
            Ok((plus - minus) / (2.0 * h))
        };
        let d_re = partial(C64::new(h, 0.0))?;
        let d_im = partial(C64::new(0.0, h))?;
        g[idx] = C64::new(0.5 * d_re, 0.5 * d_im);
    }
    Ok(g)
}

/// Finite-difference gradient of the sampled objective, reusing `ss` for
/// every probe.
pub fn fd_gradient(w: &CMat, ss: &SampleSet, oc: &ObjectiveConfig, h: f64) -> Result<CMat> {
    if !(h.is_finite() && h > 0.0) {
        return Err(crate::Error::InvalidConfig(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let obj = SampledObjective::new(ss, oc)?;
    fd_gradient_of(|x| obj.value(x), w, h)
}

/// Analytic gradient and finite-difference oracle side by side.
pub fn gradient_report(
    w: &CMat,
    ss: &SampleSet,
    oc: &ObjectiveConfig,
    h: f64,
) -> Result<GradientReport> {
    let analytic = euclidean_gradient(w, ss, oc)?;
    let fd = fd_gradient(w, ss, oc, h)?;
    Ok(GradientReport::new(analytic, fd))
}
