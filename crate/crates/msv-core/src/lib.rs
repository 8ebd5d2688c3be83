//! Multivariate stochastic volatility with a spectral covariance parametrization.
//!
//! The covariance matrix of a K-dimensional return (or factor) vector is
//! represented by K log-eigenvalues and K(K-1)/2 Givens rotation angles, each
//! following an independent latent Gaussian AR(1) path. This crate provides:
//!
//! - [`givens`]: O(K²) Gaussian log-density and gradient kernels in the
//!   spectral parametrization, plus dense reconstruction for reporting.
//! - [`prior`]: the latent AR(1) prior — parameter transforms, tridiagonal
//!   precision solves, linear-time sampling.
//! - [`samplers`]: MCMC transition kernels — the prior-invariant auxiliary
//!   Langevin update for all latent paths, factor updates, and conjugate
//!   Gibbs blocks.
//! - [`model`]: the full factor model posterior and the Metropolis-within-Gibbs
//!   sweep, with missing-data support.
//! - [`forecast`]: next-period covariance prediction, particle-filter
//!   predictive likelihoods, discrepancy measures, and minimum-variance
//!   portfolio weights.
//! - [`diagnostics`]: effective sample size estimation.
//!
//! The crate is `no_std` (with `alloc`); all I/O lives in the companion CLI
//! crate. Every sampler takes its RNG explicitly, so runs are reproducible
//! under a fixed seed.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod forecast;
pub mod givens;
pub mod instrument;
pub mod linalg;
pub mod model;
pub mod prior;
pub mod samplers;
pub mod simulate;

pub use givens::{PairIndex, SpectralCov};
pub use linalg::Mat;
pub use model::{ModelConfig, PosteriorDraws, ReturnsPanel};
pub use prior::{HyperParams, LatentPaths, PathParams};
