//! The complex power sphere `{W ∈ ℂ^{N_t×N_s} : tr(WWᴴ) = P}`.
//!
//! The ambient space carries the real inner product `⟨U, V⟩ = Re tr(UᴴV)`.
//! The orthogonal projector onto the tangent space at `W` is
//! `V − (⟨W, V⟩ / P) W`, which reduces to `V − ⟨W, V⟩ W` on the unit sphere.

use rand_distr::{Distribution, StandardNormal};

use crate::linalg::re_inner;
use crate::seed::rng_from_seed;
use crate::{CMat, Error, Result, C64};

/// Relative tolerance for the power constraint.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// A point on the power sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    mat: CMat,
    power: f64,
}

impl Precoder {
    /// Wraps `mat`, checking `|tr(WWᴴ) − P| ≤ 1e-10·P`.
    pub fn new(mat: CMat, power: f64) -> Result<Self> {
        check_power(power)?;
        let p = mat.norm_squared();
        if (p - power).abs() > FEASIBILITY_TOL * power {
            return Err(Error::InvalidConfig(format!(
                "precoder power {p} is off the sphere of radius² {power}"
            )));
        }
        Ok(Self { mat, power })
    }

    /// Rescales `mat` onto the sphere.
    pub fn normalized(mat: CMat, power: f64) -> Result<Self> {
        check_power(power)?;
        let norm = mat.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::DegenerateRetraction);
        }
        let mat = mat * C64::new(power.sqrt() / norm, 0.0);
        Ok(Self { mat, power })
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// `|tr(WWᴴ) − P| / P`.
    pub fn feasibility_residual(&self) -> f64 {
        (self.mat.norm_squared() - self.power).abs() / self.power
    }
}

fn check_power(power: f64) -> Result<()> {
    if power.is_finite() && power > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "power budget must be positive, got {power}"
        )))
    }
}

/// A tangent vector together with the point it is attached to.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    mat: CMat,
    base: Precoder,
}

impl TangentVector {
    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn base(&self) -> &Precoder {
        &self.base
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// `|Re tr(WᴴV)|` relative to `‖W‖‖V‖`.
    pub fn tangency_residual(&self) -> f64 {
        let scale = self.base.mat.norm() * self.mat.norm();
        if scale == 0.0 {
            0.0
        } else {
            re_inner(&self.base.mat, &self.mat).abs() / scale
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mat: &self.mat * C64::new(c, 0.0),
            base: self.base.clone(),
        }
    }

    /// Sum of two tangent vectors at the same base point.
    pub fn add(&self, other: &TangentVector) -> Self {
        Self {
            mat: &self.mat + &other.mat,
            base: self.base.clone(),
        }
    }

    /// Real inner product with another tangent vector.
    pub fn inner(&self, other: &TangentVector) -> f64 {
        re_inner(&self.mat, &other.mat)
    }
}

/// Orthogonal projection of `v` onto the tangent space at `w`.
pub fn project_tangent(w: &Precoder, v: &CMat) -> TangentVector {
    let c = re_inner(&w.mat, v) / w.power;
    TangentVector {
        mat: v - &w.mat * C64::new(c, 0.0),
        base: w.clone(),
    }
}

/// Riemannian gradient from a Euclidean gradient.
pub fn riemannian_gradient(w: &Precoder, egrad: &CMat) -> TangentVector {
    project_tangent(w, egrad)
}

/// Metric-projection retraction `√P (W + tV) / ‖W + tV‖_F`.
pub fn retract(w: &Precoder, v: &TangentVector, step: f64) -> Result<Precoder> {
    let moved = &w.mat + &v.mat * C64::new(step, 0.0);
    Precoder::normalized(moved, w.power)
}

/// Projection transport of `v` into the tangent space at `to`.
pub fn transport(_from: &Precoder, to: &Precoder, v: &TangentVector) -> TangentVector {
    project_tangent(to, &v.mat)
}

/// Complex Gaussian matrix rescaled onto the sphere, deterministic in `seed`.
pub fn random_point(n_tx: usize, n_streams: usize, power: f64, seed: u64) -> Result<Precoder> {
    let mut rng = rng_from_seed(seed);
    let mat = CMat::from_fn(n_tx, n_streams, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    Precoder::normalized(mat, power)
}
