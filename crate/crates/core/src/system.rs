//! MIMO-OFDM system model.
//!
//! The channel on resource element `m = (n, k)` is the sum of `L` rank-one
//! path contributions
//!
//! ```text
//! H_m(ξ) = Σ_l b_l ω_{m,l} a_R(φ_l) a_T(θ_l)ᵀ,
//! ω_{m,l} = exp(−j2π n f₀ τ_l) · exp(j2π f_{D,l} k T_s)
//! ```
//!
//! with half-wavelength ULA responses `a(θ)_p = exp(jπ p sin θ)`. The real
//! parameter vector is stacked as `ξ = [b_R, b_I, τ, f_D, θ, φ]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{CMat, CVec, Error, Result, C64};

/// Number of real parameter groups per path (`b_R, b_I, τ, f_D, θ, φ`).
pub const PARAMS_PER_PATH: usize = 6;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_streams: usize,
    /// Subcarrier spacing `f₀` in Hz.
    pub subcarrier_spacing: f64,
    /// OFDM symbol duration `T_s` in seconds.
    pub symbol_duration: f64,
    /// Noise power `σ_z²` (linear).
    pub noise_power: f64,
    /// Transmit power budget `P`.
    pub power_budget: f64,
    /// Carrier frequency in Hz, used only to turn speeds into Doppler shifts.
    pub carrier_freq: f64,
}

impl SystemConfig {
    /// The 8×8 antenna, 3-stream, 15 kHz configuration used for the full-scale
    /// experiments. `T_s = 1/f₀` (no cyclic prefix).
    pub fn full_scale() -> Self {
        let f0 = 15e3;
        Self {
            n_tx: 8,
            n_rx: 8,
            n_streams: 3,
            subcarrier_spacing: f0,
            symbol_duration: 1.0 / f0,
            noise_power: 1.0,
            power_budget: 1.0,
            carrier_freq: 28e9,
        }
    }

    /// The small 4×4, 2-stream configuration used by tests and quick runs.
    pub fn smoke() -> Self {
        Self {
            n_tx: 4,
            n_rx: 4,
            n_streams: 2,
            ..Self::full_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 || self.n_streams == 0 {
            return Err(Error::InvalidConfig(
                "antenna and stream counts must be positive".into(),
            ));
        }
        if self.n_streams > self.n_tx {
            return Err(Error::InvalidConfig(format!(
                "n_streams ({}) exceeds n_tx ({})",
                self.n_streams, self.n_tx
            )));
        }
        let positive = [
            ("subcarrier_spacing", self.subcarrier_spacing),
            ("symbol_duration", self.symbol_duration),
            ("noise_power", self.noise_power),
            ("power_budget", self.power_budget),
            ("carrier_freq", self.carrier_freq),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::full_scale()
    }
}

/// One (subcarrier, OFDM symbol) cell of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResourceElement {
    pub subcarrier: usize,
    pub symbol: usize,
}

impl ResourceElement {
    pub const fn new(subcarrier: usize, symbol: usize) -> Self {
        Self { subcarrier, symbol }
    }
}

/// Ordered set of resource elements allocated for data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceGrid {
    elements: Vec<ResourceElement>,
}

impl ResourceGrid {
    /// Builds a grid from an explicit list, rejecting duplicates.
    pub fn from_elements(elements: Vec<ResourceElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidConfig("resource grid is empty".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(elements.len());
        for re in &elements {
            if !seen.insert(*re) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate resource element ({}, {})",
                    re.subcarrier, re.symbol
                )));
            }
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[ResourceElement] {
        &self.elements
    }

    /// Number of resource elements `M`.
    pub fn m_count(&self) -> usize {
        self.elements.len()
    }
}

/// Rectangular `n_subcarriers × n_symbols` grid in subcarrier-major order:
/// the subcarrier index runs fastest, then the symbol index.
pub fn resource_grid(n_subcarriers: usize, n_symbols: usize) -> Result<ResourceGrid> {
    if n_subcarriers == 0 || n_symbols == 0 {
        return Err(Error::InvalidConfig(format!(
            "grid dimensions must be positive, got {n_subcarriers}×{n_symbols}"
        )));
    }
    let elements = (0..n_symbols)
        .flat_map(|k| (0..n_subcarriers).map(move |n| ResourceElement::new(n, k)))
        .collect();
    Ok(ResourceGrid { elements })
}

/// Multipath parameters of `L` paths. Angles are in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub gains_re: Vec<f64>,
    pub gains_im: Vec<f64>,
    /// Path delays in seconds.
    pub delays: Vec<f64>,
    /// Doppler shifts in Hz.
    pub dopplers: Vec<f64>,
    /// Angles of departure.
    pub aod: Vec<f64>,
    /// Angles of arrival.
    pub aoa: Vec<f64>,
}

impl ChannelParams {
    pub fn new(
        gains_re: Vec<f64>,
        gains_im: Vec<f64>,
        delays: Vec<f64>,
        dopplers: Vec<f64>,
        aod: Vec<f64>,
        aoa: Vec<f64>,
    ) -> Result<Self> {
        let p = Self {
            gains_re,
            gains_im,
            delays,
            dopplers,
            aod,
            aoa,
        };
        p.validate()?;
        Ok(p)
    }

    /// Rebuilds the parameters from the stacked vector `[b_R, b_I, τ, f_D, θ, φ]`.
    pub fn from_vector(xi: &[f64]) -> Result<Self> {
        if xi.is_empty() || !xi.len().is_multiple_of(PARAMS_PER_PATH) {
            return Err(Error::DimensionMismatch(format!(
                "parameter vector length {} is not a positive multiple of {PARAMS_PER_PATH}",
                xi.len()
            )));
        }
        let l = xi.len() / PARAMS_PER_PATH;
        let block = |i: usize| xi[i * l..(i + 1) * l].to_vec();
        Ok(Self {
            gains_re: block(0),
            gains_im: block(1),
            delays: block(2),
            dopplers: block(3),
            aod: block(4),
            aoa: block(5),
        })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        self.blocks()
            .iter()
            .flat_map(|b| b.iter().copied())
            .collect()
    }

    fn blocks(&self) -> [&Vec<f64>; PARAMS_PER_PATH] {
        [
            &self.gains_re,
            &self.gains_im,
            &self.delays,
            &self.dopplers,
            &self.aod,
            &self.aoa,
        ]
    }

    pub fn n_paths(&self) -> usize {
        self.gains_re.len()
    }

    /// Dimension of the stacked parameter vector, `6L`.
    pub fn dim(&self) -> usize {
        PARAMS_PER_PATH * self.n_paths()
    }

    pub fn gain(&self, l: usize) -> C64 {
        C64::new(self.gains_re[l], self.gains_im[l])
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.gains_re.len();
        if l == 0 {
            return Err(Error::InvalidConfig("at least one path is required".into()));
        }
        if self.blocks().iter().any(|b| b.len() != l) {
            return Err(Error::DimensionMismatch(
                "channel parameter vectors differ in length".into(),
            ));
        }
        if self
            .blocks()
            .iter()
            .any(|b| b.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidConfig(
                "channel parameters must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Half-wavelength ULA response, element `p` equal to `exp(jπ p sin θ)`.
pub fn steering_vector(angle: f64, n_elem: usize) -> CVec {
    let s = PI * angle.sin();
    CVec::from_iterator(
        n_elem,
        (0..n_elem).map(|p| C64::from_polar(1.0, s * p as f64)),
    )
}

/// Derivative of [`steering_vector`] with respect to the angle.
pub fn steering_derivative(angle: f64, n_elem: usize) -> CVec {
    let s = PI * angle.sin();
    let c = PI * angle.cos();
    CVec::from_iterator(
        n_elem,
        (0..n_elem).map(|p| {
            let p = p as f64;
            C64::new(0.0, c * p) * C64::from_polar(1.0, s * p)
        }),
    )
}

/// `ω = exp(−j2π n f₀ τ) · exp(j2π f_D k T_s)`.
pub fn phase_rotation(re: ResourceElement, tau: f64, fd: f64, cfg: &SystemConfig) -> C64 {
    let phase = -2.0 * PI * re.subcarrier as f64 * cfg.subcarrier_spacing * tau
        + 2.0 * PI * fd * re.symbol as f64 * cfg.symbol_duration;
    C64::from_polar(1.0, phase)
}

/// Steering matrix `[a(θ_1) … a(θ_L)]`.
pub fn steering_matrix(angles: &[f64], n_elem: usize) -> CMat {
    CMat::from_columns(
        &angles
            .iter()
            .map(|&a| steering_vector(a, n_elem))
            .collect::<Vec<_>>(),
    )
}

/// Derivative steering matrix `[d(θ_1) … d(θ_L)]`.
pub fn steering_derivative_matrix(angles: &[f64], n_elem: usize) -> CMat {
    CMat::from_columns(
        &angles
            .iter()
            .map(|&a| steering_derivative(a, n_elem))
            .collect::<Vec<_>>(),
    )
}

/// `H_m(ξ)` as the sum of per-path rank-one outer products.
pub fn channel_matrix(params: &ChannelParams, re: ResourceElement, cfg: &SystemConfig) -> CMat {
    let mut h = CMat::zeros(cfg.n_rx, cfg.n_tx);
    for l in 0..params.n_paths() {
        let coeff = params.gain(l) * phase_rotation(re, params.delays[l], params.dopplers[l], cfg);
        let a_r = steering_vector(params.aoa[l], cfg.n_rx);
        let a_t = steering_vector(params.aod[l], cfg.n_tx);
        h += (a_r * a_t.transpose()) * coeff;
    }
    h
}

/// Per-path diagonals of `Λ_m` for a single resource element, stacked in the
/// parameter order `[Ω, jΩ, G B, F B, Ω B, Ω B]`.
pub fn lambda_diagonal(params: &ChannelParams, re: ResourceElement, cfg: &SystemConfig) -> CVec {
    let l = params.n_paths();
    let mut out = CVec::zeros(PARAMS_PER_PATH * l);
    let j = C64::new(0.0, 1.0);
    let delay_rate = -2.0 * PI * re.subcarrier as f64 * cfg.subcarrier_spacing;
    let doppler_rate = 2.0 * PI * re.symbol as f64 * cfg.symbol_duration;
    for p in 0..l {
        let omega = phase_rotation(re, params.delays[p], params.dopplers[p], cfg);
        let b = params.gain(p);
        let u = j * delay_rate * omega;
        let v = j * doppler_rate * omega;
        out[p] = omega;
        out[l + p] = j * omega;
        out[2 * l + p] = u * b;
        out[3 * l + p] = v * b;
        out[4 * l + p] = omega * b;
        out[5 * l + p] = omega * b;
    }
    out
}

/// Angle-dependent factors `T = [A_T ×4, D_T, A_T]` and `R = [A_R ×5, D_R]`,
/// so that the AoD derivative lands in the `θ` columns and the AoA derivative
/// in the `φ` columns.
#[derive(Debug, Clone)]
pub struct ArrayFactors {
    pub t_mat: CMat,
    pub r_mat: CMat,
}

impl ArrayFactors {
    pub fn new(params: &ChannelParams, cfg: &SystemConfig) -> Self {
        let a_t = steering_matrix(&params.aod, cfg.n_tx);
        let d_t = steering_derivative_matrix(&params.aod, cfg.n_tx);
        let a_r = steering_matrix(&params.aoa, cfg.n_rx);
        let d_r = steering_derivative_matrix(&params.aoa, cfg.n_rx);
        let t_mat = hstack(&[&a_t, &a_t, &a_t, &a_t, &d_t, &a_t]);
        let r_mat = hstack(&[&a_r, &a_r, &a_r, &a_r, &a_r, &d_r]);
        Self { t_mat, r_mat }
    }
}

fn hstack(parts: &[&CMat]) -> CMat {
    let rows = parts[0].nrows();
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut c0 = 0;
    for p in parts {
        out.view_mut((0, c0), (rows, p.ncols())).copy_from(*p);
        c0 += p.ncols();
    }
    out
}

/// The factor matrices of the closed-form mean Jacobian on one resource element.
#[derive(Debug, Clone)]
pub struct StructureMatrices {
    /// Diagonal of `Λ_m` (the matrix is diagonal in every block).
    pub lambda_diag: CVec,
    pub t_mat: CMat,
    pub r_mat: CMat,
}

impl StructureMatrices {
    /// Dense `Λ_m`.
    pub fn lambda_matrix(&self) -> CMat {
        CMat::from_diagonal(&self.lambda_diag)
    }

    /// `∂μ_m/∂ξ = (RΛ_m) ∗ (xᵀT)` for a transmitted vector `x`, an `N_r × 6L`
    /// matrix. With a single row on the right, the Khatri-Rao product reduces to
    /// scaling column `i` of `RΛ_m` by `(xᵀT)_i`.
    pub fn mean_jacobian(&self, x: &CVec) -> CMat {
        let xt = x.transpose() * &self.t_mat;
        let mut out = self.r_mat.clone();
        for (i, mut col) in out.column_iter_mut().enumerate() {
            col *= self.lambda_diag[i] * xt[i];
        }
        out
    }
}

pub fn structure_matrices(
    params: &ChannelParams,
    re: ResourceElement,
    cfg: &SystemConfig,
) -> StructureMatrices {
    let ArrayFactors { t_mat, r_mat } = ArrayFactors::new(params, cfg);
    StructureMatrices {
        lambda_diag: lambda_diagonal(params, re, cfg),
        t_mat,
        r_mat,
    }
}

/// Noise-free received signal `μ_m = H_m(ξ) x`.
pub fn received_mean(
    params: &ChannelParams,
    re: ResourceElement,
    x: &CVec,
    cfg: &SystemConfig,
) -> CVec {
    channel_matrix(params, re, cfg) * x
}
