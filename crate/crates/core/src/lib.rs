//! Linear precoder design for MIMO-OFDM integrated sensing and communication.
//!
//! The precoder `W` maximizes a weighted log-determinant of the Bayesian
//! Fisher information of the joint (channel parameter, data symbol) estimation
//! problem. The expectation over the channel prior is replaced by a sample
//! average and the power constraint `tr(WWᴴ) = P` is handled by optimizing on
//! the complex power sphere with stochastic Riemannian gradient methods.
//!
//! Module map:
//!
//! * [`system`]: OFDM numerology, multipath channel parameters, steering vectors
//!   and the structure matrices of the mean Jacobian.
//! * [`bfim`]: Fisher information blocks, sensing/communication objectives and
//!   the block-diagonal BFIM.
//! * [`gradient`]: Wirtinger gradient of the sampled objective and its
//!   finite-difference oracle.
//! * [`manifold`]: the power sphere (projection, retraction, transport).
//! * [`optimizer`]: SRGD / SRCG loops, line search, KKT diagnostics.
//! * [`sampler`]: scenario and prior sampling, default weighting matrix.

pub mod bfim;
pub mod error;
pub mod gradient;
pub mod linalg;
pub mod manifold;
pub mod optimizer;
pub mod sampler;
pub mod seed;
pub mod system;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
/// Dense real column vector.
pub type RVec = nalgebra::DVector<f64>;
