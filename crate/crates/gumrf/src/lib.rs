//! Sampling of discrete label fields on toroidal lattices.
//!
//! The core pipeline draws stationary Gaussian (Markov) random fields on the
//! torus — by circulant/Fourier sampling, by a random-band spectral method,
//! or by a dense Cholesky oracle — and maps the resulting real-valued stack
//! through a unit-simplex discretization to obtain a label field. Classical
//! sequential and chromatic Gibbs samplers for Ising/Potts models are
//! provided as baselines, together with the estimators used to validate the
//! simplex sampler against them (class balance, pairwise similarity,
//! neighbor-agreement phase curves, empirical covariance).

// Parameter checks are written `!(x > 0.0)` on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod covariance;
pub mod fft;
pub mod field;
pub mod gmrf;
pub mod gum;
pub mod lattice;
pub mod potts;
pub mod rng;
pub mod stats;

mod error;

pub use error::{Error, Result};
pub use field::{LabelField, RealField, RealFieldStack};
pub use lattice::{GridShape, NeighborhoodSystem};
pub use rng::RngSeed;
