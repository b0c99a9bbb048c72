//! Bayesian Fisher information of the joint channel-parameter / data-symbol
//! estimation problem and the precoder objectives derived from it.
//!
//! Averaged over the data symbols, the BFIM is block diagonal: one `6L × 6L`
//! block for the channel parameters and one `2N_s × 2N_s` block per resource
//! element. The sensing objective is the weighted log-determinant of the
//! parameter block,
//!
//! ```text
//! f̂_s(W) = log det( J ((2/σ²) Σ_m S_m^N(W) + C_ξ⁻¹) J ),
//! S_m(W, ξ) = Re{ (Λ_mᴴ Tᴴ W* Wᵀ T Λ_m) ∘ (Rᴴ R) },
//! ```
//!
//! and the communication objective collapses each symbol block to
//!
//! ```text
//! f̂_c(W) = Σ_m 2 log det( (2/σ²) Wᴴ K_m^N W + 2I ).
//! ```
//!
//! The combined objective is `α f̂_s + (1 − α) f̂_c / M`.
//!
//! Two evaluation routes exist. The per-resource-element functions
//! ([`fim_param_block`], [`channel_gram_avg`], ...) follow the formulas
//! literally and serve as the reference. [`SampledObjective`] precomputes the
//! `W`-independent parts of a sample set so that value and gradient cost
//! `O(N)` small matrix products for the sensing term instead of `O(N·M)`.

use serde::{Deserialize, Serialize};

use crate::linalg::{
    hermitize, inverse_hpd, inverse_spd, logdet_hpd, logdet_spd, real_part, symmetrize,
};
use crate::system::{
    lambda_diagonal, steering_matrix, structure_matrices, ArrayFactors, ChannelParams,
    ResourceElement, ResourceGrid, SystemConfig,
};
use crate::{CMat, CVec, Error, RMat, RVec, Result, C64};

/// Gaussian prior on the channel parameters with diagonal covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub mean: Vec<f64>,
    pub cov_diag: Vec<f64>,
}

impl PriorSpec {
    pub fn new(mean: Vec<f64>, cov_diag: Vec<f64>) -> Result<Self> {
        let p = Self { mean, cov_diag };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != self.cov_diag.len()
            || self.mean.is_empty()
            || !self.mean.len().is_multiple_of(6)
        {
            return Err(Error::DimensionMismatch(format!(
                "prior mean has length {} and covariance diagonal {}; both must equal 6L",
                self.mean.len(),
                self.cov_diag.len()
            )));
        }
        if let Some(v) = self.cov_diag.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "prior variance must be positive, got {v}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Diagonal of `C_ξ⁻¹`.
    pub fn precision(&self) -> RVec {
        RVec::from_iterator(self.cov_diag.len(), self.cov_diag.iter().map(|v| 1.0 / v))
    }
}

/// Diagonal weighting matrix `J` applied to the parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    pub diag: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if let Some(v) = diag.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "weights must be positive, got {v}"
            )));
        }
        Ok(Self { diag })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            diag: vec![1.0; dim],
        }
    }
}

/// Channel parameter draws used to approximate expectations over the prior.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<ChannelParams>,
    pub seed: u64,
}

impl SampleSet {
    pub fn new(samples: Vec<ChannelParams>, seed: u64) -> Result<Self> {
        let ss = Self { samples, seed };
        ss.validate()?;
        Ok(ss)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.samples.first().ok_or(Error::EmptySampleSet)?;
        let l = first.n_paths();
        for s in &self.samples {
            s.validate()?;
            if s.n_paths() != l {
                return Err(Error::DimensionMismatch(
                    "samples have different path counts".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ObjectiveConfig {
    /// Trade-off factor in `[0, 1]`; 1 is pure sensing.
    pub alpha: f64,
    pub system: SystemConfig,
    pub prior: PriorSpec,
    pub weights: WeightMatrix,
    pub grid: ResourceGrid,
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        self.system.validate()?;
        self.prior.validate()?;
        if self.weights.diag.len() != self.prior.dim() {
            return Err(Error::DimensionMismatch(format!(
                "weight matrix has {} entries, prior has {}",
                self.weights.diag.len(),
                self.prior.dim()
            )));
        }
        Ok(())
    }

    /// `2/σ²`.
    fn info_scale(&self) -> f64 {
        2.0 / self.system.noise_power
    }
}

fn check_precoder(w: &CMat, cfg: &SystemConfig) -> Result<()> {
    if w.nrows() != cfg.n_tx || w.ncols() != cfg.n_streams {
        return Err(Error::DimensionMismatch(format!(
            "precoder is {}×{}, system expects {}×{}",
            w.nrows(),
            w.ncols(),
            cfg.n_tx,
            cfg.n_streams
        )));
    }
    Ok(())
}

/// `Re{ (Λᴴ Tᴴ F* Fᵀ T Λ) ∘ (RᴴR) }` for an `N_t × r` factor `F`. With `F = W`
/// this is `S_m(W, ξ)`; with `F = x` it is the fixed-symbol block.
fn param_block_from_factor(
    f: &CMat,
    params: &ChannelParams,
    re: ResourceElement,
    cfg: &SystemConfig,
) -> RMat {
    let s = structure_matrices(params, re, cfg);
    let lam = s.lambda_matrix();
    let ft_t_lam = f.transpose() * &s.t_mat * &lam;
    let left = ft_t_lam.adjoint() * &ft_t_lam;
    let gram = s.r_mat.adjoint() * &s.r_mat;
    let mut out = real_part(&left.component_mul(&gram));
    symmetrize(&mut out);
    out
}

/// `S_m(W, ξ)`: the symbol-averaged parameter information on one resource
/// element, without the `2/σ²` factor.
pub fn fim_param_block(
    w: &CMat,
    params: &ChannelParams,
    re: ResourceElement,
    cfg: &SystemConfig,
) -> Result<RMat> {
    check_precoder(w, cfg)?;
    params.validate()?;
    Ok(param_block_from_factor(w, params, re, cfg))
}

/// `Re{ (Λᴴ Tᴴ x* xᵀ T Λ) ∘ (RᴴR) }` for a fixed transmitted vector `x`.
pub fn fim_param_block_fixed_symbols(
    x: &CVec,
    params: &ChannelParams,
    re: ResourceElement,
    cfg: &SystemConfig,
) -> Result<RMat> {
    if x.len() != cfg.n_tx {
        return Err(Error::DimensionMismatch(format!(
            "x has length {}, expected {}",
            x.len(),
            cfg.n_tx
        )));
    }
    let f = CMat::from_column_slice(x.len(), 1, x.as_slice());
    Ok(param_block_from_factor(&f, params, re, cfg))
}

/// Conditional FIM block `I_c(ξ, ξ)` on one resource element for known `x`:
/// `(2/σ²) Re{(∂μ/∂ξ)ᴴ ∂μ/∂ξ}` evaluated through the closed-form structure.
pub fn conditional_fim_param(
    x: &CVec,
    params: &ChannelParams,
    re: ResourceElement,
    cfg: &SystemConfig,
) -> Result<RMat> {
    Ok(fim_param_block_fixed_symbols(x, params, re, cfg)? * (2.0 / cfg.noise_power))
}

/// `S_m^N(W)`: the mean of [`fim_param_block`] over a sample set.
pub fn fim_param_block_avg(
    w: &CMat,
    ss: &SampleSet,
    re: ResourceElement,
    cfg: &SystemConfig,
) -> Result<RMat> {
    check_precoder(w, cfg)?;
    ss.validate()?;
    let dim = ss.samples[0].dim();
    let mut acc = RMat::zeros(dim, dim);
    for s in &ss.samples {
        acc += param_block_from_factor(w, s, re, cfg);
    }
    Ok(acc / ss.len() as f64)
}

/// `K_m^N = (1/N) Σ_n H_m(ξ_n)ᴴ H_m(ξ_n)`.
pub fn channel_gram_avg(ss: &SampleSet, re: ResourceElement, cfg: &SystemConfig) -> Result<CMat> {
    ss.validate()?;
    let mut acc = CMat::zeros(cfg.n_tx, cfg.n_tx);
    for s in &ss.samples {
        let h = crate::system::channel_matrix(s, re, cfg);
        acc += h.adjoint() * h;
    }
    let mut k = acc / C64::new(ss.len() as f64, 0.0);
    hermitize(&mut k);
    Ok(k)
}

/// Block-diagonal real symmetric matrix stored block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    blocks: Vec<RMat>,
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<RMat>) -> Result<Self> {
        if let Some(b) = blocks.iter().find(|b| !b.is_square()) {
            return Err(Error::DimensionMismatch(format!(
                "block is {}×{}",
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[RMat] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    pub fn to_dense(&self) -> RMat {
        let n = self.dim();
        let mut out = RMat::zeros(n, n);
        let mut o = 0;
        for b in &self.blocks {
            let k = b.nrows();
            out.view_mut((o, o), (k, k)).copy_from(b);
            o += k;
        }
        out
    }

    /// Sum of the per-block log-determinants.
    pub fn logdet(&self) -> Result<f64> {
        self.blocks
            .iter()
            .map(|b| logdet_spd(b, "information block"))
            .sum()
    }

    /// Blockwise inverse.
    pub fn inverse(&self) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(index, b)| inverse_spd(b, "block").map_err(|_| Error::SingularBlock { index }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks })
    }
}

/// `I_p = blkdiag(C_ξ⁻¹, 2 I_{2N_s M})`, with the symbol part split into one
/// `2N_s` block per resource element.
pub fn prior_fim(prior: &PriorSpec, m_count: usize, n_streams: usize) -> Result<BlockDiagonal> {
    prior.validate()?;
    let mut blocks = Vec::with_capacity(m_count + 1);
    blocks.push(RMat::from_diagonal(&prior.precision()));
    blocks.extend((0..m_count).map(|_| RMat::identity(2 * n_streams, 2 * n_streams) * 2.0));
    BlockDiagonal::new(blocks)
}

/// The assembled BFIM: parameter block plus one symbol block per resource element.
#[derive(Debug, Clone, PartialEq)]
pub struct BfimMatrix {
    /// `E[I_c(ξ, ξ)] + C_ξ⁻¹`.
    pub xi_block: RMat,
    /// `E[I_c(s̃_m, s̃_m)] + 2I` for every resource element.
    pub symbol_blocks: Vec<RMat>,
}

impl BfimMatrix {
    /// `6L + 2N_s M`.
    pub fn dim(&self) -> usize {
        self.xi_block.nrows() + self.symbol_blocks.iter().map(|b| b.nrows()).sum::<usize>()
    }

    pub fn as_block_diagonal(&self) -> BlockDiagonal {
        let mut blocks = Vec::with_capacity(self.symbol_blocks.len() + 1);
        blocks.push(self.xi_block.clone());
        blocks.extend(self.symbol_blocks.iter().cloned());
        BlockDiagonal { blocks }
    }

    pub fn to_dense(&self) -> RMat {
        self.as_block_diagonal().to_dense()
    }
}

/// Symbol block `(2/σ²) Re{W̃ᴴ E[H̃ᴴH̃] W̃} + 2I` built from `H̃ = [H H]` and
/// `W̃ = blkdiag(W, jW)`, with `E[H̃ᴴH̃] = [[K, K], [K, K]]`.
fn symbol_block(w: &CMat, k: &CMat, noise_power: f64) -> RMat {
    let (nt, ns) = (w.nrows(), w.ncols());
    let mut kk = CMat::zeros(2 * nt, 2 * nt);
    for (r, c) in [(0, 0), (0, nt), (nt, 0), (nt, nt)] {
        kk.view_mut((r, c), (nt, nt)).copy_from(k);
    }
    let mut wt = CMat::zeros(2 * nt, 2 * ns);
    wt.view_mut((0, 0), (nt, ns)).copy_from(w);
    wt.view_mut((nt, ns), (nt, ns))
        .copy_from(&(w * C64::new(0.0, 1.0)));
    let mut out = real_part(&(wt.adjoint() * kk * wt)) * (2.0 / noise_power);
    out += RMat::identity(2 * ns, 2 * ns) * 2.0;
    symmetrize(&mut out);
    out
}

/// Builds the full block-diagonal BFIM with sample-averaged expectations.
/// The cross blocks between `ξ` and the symbols vanish because `x_m` has zero
/// mean, so only diagonal blocks are stored.
pub fn assemble_bfim(w: &CMat, ss: &SampleSet, oc: &ObjectiveConfig) -> Result<BfimMatrix> {
    oc.validate()?;
    check_precoder(w, &oc.system)?;
    ss.validate()?;
    let dim = oc.prior.dim();
    let mut xi_block = RMat::from_diagonal(&oc.prior.precision());
    let mut symbol_blocks = Vec::with_capacity(oc.grid.m_count());
    let mut s_sum = RMat::zeros(dim, dim);
    for &re in oc.grid.elements() {
        s_sum += fim_param_block_avg(w, ss, re, &oc.system)?;
        let k = channel_gram_avg(ss, re, &oc.system)?;
        symbol_blocks.push(symbol_block(w, &k, oc.system.noise_power));
    }
    xi_block += s_sum * oc.info_scale();
    symmetrize(&mut xi_block);
    Ok(BfimMatrix {
        xi_block,
        symbol_blocks,
    })
}

/// Blockwise inverse of the BFIM.
pub fn bcrb(bfim: &BfimMatrix) -> Result<BlockDiagonal> {
    bfim.as_block_diagonal().inverse()
}

/// `f̂_s(W)` through the per-resource-element reference route.
pub fn objective_sensing(w: &CMat, ss: &SampleSet, oc: &ObjectiveConfig) -> Result<f64> {
    oc.validate()?;
    check_precoder(w, &oc.system)?;
    let dim = oc.prior.dim();
    let mut s_sum = RMat::zeros(dim, dim);
    for &re in oc.grid.elements() {
        s_sum += fim_param_block_avg(w, ss, re, &oc.system)?;
    }
    let f = s_sum * oc.info_scale() + RMat::from_diagonal(&oc.prior.precision());
    logdet_spd(&weighted(&f, &oc.weights), "weighted parameter information")
}

/// `f̂_c(W)` through the per-resource-element reference route.
pub fn objective_comm(w: &CMat, ss: &SampleSet, oc: &ObjectiveConfig) -> Result<f64> {
    oc.validate()?;
    check_precoder(w, &oc.system)?;
    let mut total = 0.0;
    for &re in oc.grid.elements() {
        let k = channel_gram_avg(ss, re, &oc.system)?;
        total += comm_term(w, &k, oc.info_scale())?;
    }
    Ok(total)
}

/// `α f̂_s + (1 − α) f̂_c / M` through the reference route.
pub fn objective(w: &CMat, ss: &SampleSet, oc: &ObjectiveConfig) -> Result<f64> {
    let fs = objective_sensing(w, ss, oc)?;
    let fc = objective_comm(w, ss, oc)?;
    Ok(combine(oc.alpha, fs, fc, oc.grid.m_count()))
}

fn combine(alpha: f64, fs: f64, fc: f64, m: usize) -> f64 {
    alpha * fs + (1.0 - alpha) * fc / m as f64
}

/// `J F J` for diagonal `J`.
fn weighted(f: &RMat, weights: &WeightMatrix) -> RMat {
    let d = &weights.diag;
    let mut out = RMat::from_fn(f.nrows(), f.ncols(), |i, j| d[i] * f[(i, j)] * d[j]);
    symmetrize(&mut out);
    out
}

/// `2 log det(c Wᴴ K W + 2I)`.
fn comm_term(w: &CMat, k: &CMat, c: f64) -> Result<f64> {
    Ok(2.0 * logdet_hpd(&comm_matrix(w, k, c), "communication information")?)
}

fn comm_matrix(w: &CMat, k: &CMat, c: f64) -> CMat {
    let ns = w.ncols();
    let mut b = w.adjoint() * k * w * C64::new(c, 0.0);
    for i in 0..ns {
        b[(i, i)] += C64::new(2.0, 0.0);
    }
    hermitize(&mut b);
    b
}

/// Sensing and communication terms of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub sensing: f64,
    pub comm: f64,
    pub value: f64,
}

/// `W`-independent quantities of one channel sample.
#[derive(Debug, Clone)]
struct SampleTerms {
    t_mat: CMat,
    /// `(RᴴR) ∘ Σ_m conj(λ_m) λ_mᵀ`, Hermitian.
    psi: CMat,
}

/// Sample-set cache for fast evaluation of `f̂`, `f̂_s`, `f̂_c` and their
/// Wirtinger gradient.
///
/// Because `Λ_m` is diagonal, `Σ_m S_m(W, ξ) = Re{(Tᴴ W* Wᵀ T) ∘ Ψ}` with
/// `Ψ = (RᴴR) ∘ Σ_m conj(λ_m) λ_mᵀ`, so the grid sum is folded into `Ψ`
/// once per sample set.
#[derive(Debug, Clone)]
pub struct SampledObjective<'a> {
    oc: &'a ObjectiveConfig,
    terms: Vec<SampleTerms>,
    grams: Vec<CMat>,
    precision: RVec,
}

impl<'a> SampledObjective<'a> {
    pub fn new(ss: &SampleSet, oc: &'a ObjectiveConfig) -> Result<Self> {
        oc.validate()?;
        ss.validate()?;
        let cfg = &oc.system;
        let dim = oc.prior.dim();
        if ss.samples[0].dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "samples have {} parameters, prior has {dim}",
                ss.samples[0].dim()
            )));
        }
        let m_count = oc.grid.m_count();
        let inv_n = 1.0 / ss.len() as f64;
        let mut grams = vec![CMat::zeros(cfg.n_tx, cfg.n_tx); m_count];
        let mut terms = Vec::with_capacity(ss.len());
        for s in &ss.samples {
            let ArrayFactors { t_mat, r_mat } = ArrayFactors::new(s, cfg);
            let mut lam_gram = CMat::zeros(dim, dim);
            let a_t = steering_matrix(&s.aod, cfg.n_tx);
            let a_r = steering_matrix(&s.aoa, cfg.n_rx);
            let a_t_conj = a_t.conjugate();
            let a_t_tr = a_t.transpose();
            let q = a_r.adjoint() * &a_r;
            for (m, &re) in oc.grid.elements().iter().enumerate() {
                let lam = lambda_diagonal(s, re, cfg);
                lam_gram.ger(
                    C64::new(1.0, 0.0),
                    &lam.conjugate(),
                    &lam,
                    C64::new(1.0, 0.0),
                );
                // HᴴH = conj(A_T) D̄ (A_RᴴA_R) D A_Tᵀ with D = diag(b_l ω_{m,l})
                let l = s.n_paths();
                let d: Vec<C64> = (0..l).map(|p| lam[4 * l + p]).collect();
                let mid = CMat::from_fn(l, l, |i, j| d[i].conj() * q[(i, j)] * d[j]);
                grams[m] += (&a_t_conj * mid * &a_t_tr) * C64::new(inv_n, 0.0);
            }
            let mut psi = (r_mat.adjoint() * &r_mat).component_mul(&lam_gram);
            hermitize(&mut psi);
            terms.push(SampleTerms { t_mat, psi });
        }
        for g in &mut grams {
            hermitize(g);
        }
        Ok(Self {
            oc,
            terms,
            grams,
            precision: oc.prior.precision(),
        })
    }

    pub fn config(&self) -> &ObjectiveConfig {
        self.oc
    }

    /// The averaged Gram matrices `K_m^N`, one per resource element.
    pub fn grams(&self) -> &[CMat] {
        &self.grams
    }

    /// `(2/σ²) Σ_m S_m^N(W) + C_ξ⁻¹`.
    pub fn parameter_information(&self, w: &CMat) -> Result<RMat> {
        check_precoder(w, &self.oc.system)?;
        let dim = self.precision.len();
        let mut s_sum = RMat::zeros(dim, dim);
        for t in &self.terms {
            let p = w.transpose() * &t.t_mat;
            let x = p.adjoint() * p;
            s_sum += real_part(&x.component_mul(&t.psi));
        }
        let mut f = s_sum * (self.oc.info_scale() / self.terms.len() as f64);
        for i in 0..dim {
            f[(i, i)] += self.precision[i];
        }
        symmetrize(&mut f);
        Ok(f)
    }

    pub fn sensing(&self, w: &CMat) -> Result<f64> {
        let f = self.parameter_information(w)?;
        logdet_spd(
            &weighted(&f, &self.oc.weights),
            "weighted parameter information",
        )
    }

    pub fn comm(&self, w: &CMat) -> Result<f64> {
        check_precoder(w, &self.oc.system)?;
        let c = self.oc.info_scale();
        self.grams.iter().map(|k| comm_term(w, k, c)).sum()
    }

    pub fn evaluate(&self, w: &CMat) -> Result<Evaluation> {
        let sensing = self.sensing(w)?;
        let comm = self.comm(w)?;
        Ok(Evaluation {
            sensing,
            comm,
            value: combine(self.oc.alpha, sensing, comm, self.grams.len()),
        })
    }

    pub fn value(&self, w: &CMat) -> Result<f64> {
        Ok(self.evaluate(w)?.value)
    }

    /// `∂f̂_s/∂W*`.
    pub fn sensing_gradient(&self, w: &CMat) -> Result<CMat> {
        let f = self.parameter_information(w)?;
        let d = &self.oc.weights.diag;
        let jfj_inv = inverse_spd(
            &weighted(&f, &self.oc.weights),
            "weighted parameter information",
        )?;
        // Γ = J (J F J)⁻¹ J = F⁻¹, kept in the better-conditioned weighted form
        let gamma = RMat::from_fn(f.nrows(), f.ncols(), |i, j| d[i] * jfj_inv[(i, j)] * d[j]);
        let n_tx = self.oc.system.n_tx;
        let mut y_sum = CMat::zeros(n_tx, n_tx);
        for t in &self.terms {
            let z = CMat::from_fn(gamma.nrows(), gamma.ncols(), |i, j| {
                t.psi[(i, j)].conj() * gamma[(i, j)]
            });
            y_sum += &t.t_mat * z * t.t_mat.adjoint();
        }
        let scale = self.oc.info_scale() / self.terms.len() as f64;
        Ok(y_sum.conjugate() * w * C64::new(scale, 0.0))
    }

    /// `∂f̂_c/∂W* = 2c Σ_m K_m W (c WᴴK_mW + 2I)⁻¹`.
    pub fn comm_gradient(&self, w: &CMat) -> Result<CMat> {
        check_precoder(w, &self.oc.system)?;
        let c = self.oc.info_scale();
        let mut g = CMat::zeros(w.nrows(), w.ncols());
        for k in &self.grams {
            let kw = k * w;
            let b_inv = inverse_hpd(&comm_matrix(w, k, c), "communication information")?;
            g += kw * b_inv;
        }
        Ok(g * C64::new(2.0 * c, 0.0))
    }

    /// Wirtinger gradient `∂f̂/∂W*` of the combined objective.
    pub fn gradient(&self, w: &CMat) -> Result<CMat> {
        let alpha = self.oc.alpha;
        let m = self.grams.len() as f64;
        let mut g = CMat::zeros(w.nrows(), w.ncols());
        if alpha > 0.0 {
            g += self.sensing_gradient(w)? * C64::new(alpha, 0.0);
        }
        if alpha < 1.0 {
            g += self.comm_gradient(w)? * C64::new((1.0 - alpha) / m, 0.0);
        }
        Ok(g)
    }

    pub fn value_and_gradient(&self, w: &CMat) -> Result<(Evaluation, CMat)> {
        Ok((self.evaluate(w)?, self.gradient(w)?))
    }
}
