//! Latent Gaussian AR(1) prior over the transformed volatility paths.
//!
//! Every log-eigenvalue and every transformed rotation angle follows an
//! independent stationary AR(1) process
//!
//! ```text
//! x_{t+1} = x0 + φ (x_t - x0) + σ η_t,      x_1 ~ N(x0, σ²/(1-φ²)),
//! ```
//!
//! whose joint precision is tridiagonal: diagonal `(1, 1+φ², …, 1+φ², 1)/σ²`
//! and off-diagonal `-φ/σ²`. That sparsity is what makes the auxiliary
//! Langevin proposal linear in the path length: `(2/ζ)I + Q` stays
//! tridiagonal, its Cholesky factor is lower bidiagonal, and one proposal
//! draw per path costs O(T).
//!
//! Angles are kept in the open interval (-π/2, π/2) through the logistic-type
//! bijection `δ = log(π/2 + ω) - log(π/2 - ω)`; samplers move the
//! unconstrained `δ`, kernels differentiate in `ω`, and [`dangle_ddelta`]
//! supplies the chain-rule factor between them. Persistence parameters are
//! likewise sampled on an unconstrained scale via `φ = tanh(φ̃/2)`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math in no_std builds; shadowed by std inherent methods under test
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::givens::{pair_count, SpectralCov};
use crate::instrument;

const FRAC_PI_2: f64 = core::f64::consts::FRAC_PI_2;

/// Rotation angle from its unconstrained transform: `ω = (π/2) tanh(δ/2)`.
///
/// Saturates smoothly and never overflows; for |δ| beyond ~37 the result is
/// pinned one ulp inside ±π/2 so the open-interval invariant always holds.
#[inline]
pub fn angle_from_delta(delta: f64) -> f64 {
    let max_angle = FRAC_PI_2.next_down();
    (FRAC_PI_2 * (0.5 * delta).tanh()).clamp(-max_angle, max_angle)
}

/// Forward transform `δ = log(π/2 + ω) - log(π/2 - ω)` for ω ∈ (-π/2, π/2).
#[inline]
pub fn delta_from_angle(omega: f64) -> f64 {
    (FRAC_PI_2 + omega).ln() - (FRAC_PI_2 - omega).ln()
}

/// Derivative `dω/dδ = (π/2) · 2 e^δ / (e^δ + 1)²`, evaluated in the
/// overflow-free even form `π u / (1 + u)²` with `u = e^{-|δ|}`.
#[inline]
pub fn dangle_ddelta(delta: f64) -> f64 {
    let u = (-delta.abs()).exp();
    let denom = 1.0 + u;
    core::f64::consts::PI * u / (denom * denom)
}

/// Persistence from its unconstrained transform:
/// `φ = (e^φ̃ - 1)/(e^φ̃ + 1) = tanh(φ̃/2) ∈ (-1, 1)`.
#[inline]
pub fn persistence_from_unconstrained(phi_tilde: f64) -> f64 {
    (0.5 * phi_tilde).tanh()
}

/// Inverse of [`persistence_from_unconstrained`], for |φ| < 1.
#[inline]
pub fn unconstrained_from_persistence(phi: f64) -> f64 {
    (1.0 + phi).ln() - (1.0 - phi).ln()
}

/// AR(1) parameters of one latent path. The persistence is stored on the
/// unconstrained scale so `φ = tanh(φ̃/2)` holds exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathParams {
    /// Unconstrained persistence φ̃.
    pub phi_tilde: f64,
    /// Stationary level x0 of the path.
    pub level: f64,
    /// Innovation standard deviation σ > 0.
    pub innovation_sd: f64,
}

impl PathParams {
    pub fn new(phi_tilde: f64, level: f64, innovation_sd: f64) -> Self {
        assert!(innovation_sd > 0.0, "innovation sd must be positive");
        PathParams { phi_tilde, level, innovation_sd }
    }

    /// Persistence φ ∈ (-1, 1).
    #[inline]
    pub fn phi(&self) -> f64 {
        persistence_from_unconstrained(self.phi_tilde)
    }

    /// Stationary variance σ²/(1-φ²).
    pub fn stationary_variance(&self) -> f64 {
        let phi = self.phi();
        self.innovation_sd * self.innovation_sd / (1.0 - phi * phi)
    }
}

/// How the unconstrained persistence parameters are tied together.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorMode {
    /// Hierarchical: φ̃_p ~ N(μ, λ⁻¹) with a Normal-Gamma hyperprior on (μ, λ).
    Exchangeable,
    /// Independent N(0, 10³) on each φ̃_p; hyperparameters stay fixed.
    Independent,
}

/// Fixed constants of the Normal-Gamma hyperprior
/// `(μ, λ) ~ N(μ₀, (k₀ λ)⁻¹) Ga(α₀, β₀)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalGammaPrior {
    pub mu0: f64,
    pub k0: f64,
    pub alpha0: f64,
    pub beta0: f64,
}

impl Default for NormalGammaPrior {
    fn default() -> Self {
        // Weakly informative, centered on high persistence (φ̃ = 3 ⇒ φ ≈ 0.905).
        NormalGammaPrior { mu0: 3.0, k0: 0.01, alpha0: 2.0, beta0: 0.5 }
    }
}

/// Inverse-gamma prior (shape, rate).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvGammaPrior {
    pub shape: f64,
    pub rate: f64,
}

/// Hyperparameter state and fixed prior constants for all paths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperParams {
    /// Current mean of the φ̃ prior for log-eigenvalue paths.
    pub mu_h: f64,
    /// Current precision of the φ̃ prior for log-eigenvalue paths.
    pub lambda_h: f64,
    /// Same, for transformed-angle paths.
    pub mu_delta: f64,
    pub lambda_delta: f64,
    pub normal_gamma: NormalGammaPrior,
    /// Prior on each path's innovation variance σ_p².
    pub innovation_prior: InvGammaPrior,
    pub prior_mode: PriorMode,
}

/// Variance of the fixed independent-mode prior on φ̃.
pub const INDEPENDENT_PHI_TILDE_VARIANCE: f64 = 1e3;

impl Default for HyperParams {
    fn default() -> Self {
        let ng = NormalGammaPrior::default();
        HyperParams {
            mu_h: ng.mu0,
            lambda_h: ng.alpha0 / ng.beta0,
            mu_delta: ng.mu0,
            lambda_delta: ng.alpha0 / ng.beta0,
            normal_gamma: ng,
            innovation_prior: InvGammaPrior { shape: 2.5, rate: 0.025 },
            prior_mode: PriorMode::Exchangeable,
        }
    }
}

impl HyperParams {
    /// (mean, precision) of the φ̃ prior for a log-eigenvalue path.
    pub fn phi_tilde_prior_h(&self) -> (f64, f64) {
        match self.prior_mode {
            PriorMode::Exchangeable => (self.mu_h, self.lambda_h),
            PriorMode::Independent => (0.0, 1.0 / INDEPENDENT_PHI_TILDE_VARIANCE),
        }
    }

    /// (mean, precision) of the φ̃ prior for a transformed-angle path.
    pub fn phi_tilde_prior_delta(&self) -> (f64, f64) {
        match self.prior_mode {
            PriorMode::Exchangeable => (self.mu_delta, self.lambda_delta),
            PriorMode::Independent => (0.0, 1.0 / INDEPENDENT_PHI_TILDE_VARIANCE),
        }
    }
}

/// All latent paths for one model: rows 0..K hold the log-eigenvalue paths,
/// the remaining K(K-1)/2 rows hold the transformed-angle paths in
/// lexicographic pair order. Each row is stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentPaths {
    dim: usize,
    horizon: usize,
    values: Vec<f64>,
}

impl LatentPaths {
    pub fn zeros(dim: usize, horizon: usize) -> Self {
        let n = n_paths_for_dim(dim);
        LatentPaths { dim, horizon, values: vec![0.0; n * horizon] }
    }

    /// Factor dimension K.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Path length T.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Total number of paths K(K+1)/2.
    pub fn n_paths(&self) -> usize {
        n_paths_for_dim(self.dim)
    }

    #[inline]
    pub fn row(&self, p: usize) -> &[f64] {
        &self.values[p * self.horizon..(p + 1) * self.horizon]
    }

    #[inline]
    pub fn row_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.values[p * self.horizon..(p + 1) * self.horizon]
    }

    #[inline]
    pub fn at(&self, p: usize, t: usize) -> f64 {
        self.values[p * self.horizon + t]
    }

    #[inline]
    pub fn set(&mut self, p: usize, t: usize, v: f64) {
        self.values[p * self.horizon + t] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Copies slice `t` into `(h, δ)` buffers of lengths K and K(K-1)/2.
    pub fn read_slice(&self, t: usize, h_out: &mut [f64], delta_out: &mut [f64]) {
        debug_assert_eq!(h_out.len(), self.dim);
        debug_assert_eq!(delta_out.len(), pair_count(self.dim));
        for (p, h) in h_out.iter_mut().enumerate() {
            *h = self.at(p, t);
        }
        for (m, d) in delta_out.iter_mut().enumerate() {
            *d = self.at(self.dim + m, t);
        }
    }

    /// Covariance slice at time `t`, with angles mapped back from δ.
    pub fn spectral_at(&self, t: usize) -> SpectralCov {
        let mut h = vec![0.0; self.dim];
        let mut delta = vec![0.0; pair_count(self.dim)];
        self.read_slice(t, &mut h, &mut delta);
        let angles: Vec<f64> = delta.iter().map(|d| angle_from_delta(*d)).collect();
        SpectralCov::new(h, angles).expect("finite paths map to valid spectral form")
    }
}

/// Number of latent paths for factor dimension `dim`.
#[inline]
pub fn n_paths_for_dim(dim: usize) -> usize {
    dim + pair_count(dim)
}

/// Exact AR(1) joint log-density of one path, including the stationary
/// initial distribution.
pub fn ar1_log_density(path: &[f64], params: &PathParams) -> f64 {
    instrument::record_prior_density_eval();
    let phi = params.phi();
    let sd = params.innovation_sd;
    let x0 = params.level;
    let mut lp = normal_log_pdf(path[0], x0, params.stationary_variance());
    for t in 1..path.len() {
        let mean = x0 + phi * (path[t - 1] - x0);
        lp += normal_log_pdf(path[t], mean, sd * sd);
    }
    lp
}

/// Joint log-density of all paths under their AR(1) priors; O(n_paths · T).
pub fn prior_log_density(paths: &LatentPaths, params: &[PathParams]) -> f64 {
    assert_eq!(params.len(), paths.n_paths());
    let mut lp = 0.0;
    for (p, param) in params.iter().enumerate() {
        lp += ar1_log_density(paths.row(p), param);
    }
    lp
}

#[inline]
pub(crate) fn normal_log_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * (crate::givens::LN_2PI + variance.ln() + d * d / variance)
}

/// Tridiagonal precision representation of one path's AR(1) prior:
/// mean `x0·1`, diagonal `(1, 1+φ², …, 1+φ², 1)/σ²`, off-diagonal `-φ/σ²`.
/// For T = 1 the precision degenerates to the stationary `(1-φ²)/σ²`.
#[derive(Clone, Debug)]
pub struct TridiagonalGaussian {
    level: f64,
    diag: Vec<f64>,
    off: f64,
}

impl TridiagonalGaussian {
    pub fn from_path_params(params: &PathParams, horizon: usize) -> Self {
        assert!(horizon >= 1);
        let phi = params.phi();
        let inv_var = 1.0 / (params.innovation_sd * params.innovation_sd);
        let mut diag = vec![(1.0 + phi * phi) * inv_var; horizon];
        if horizon == 1 {
            diag[0] = (1.0 - phi * phi) * inv_var;
        } else {
            diag[0] = inv_var;
            diag[horizon - 1] = inv_var;
        }
        TridiagonalGaussian { level: params.level, diag, off: -phi * inv_var }
    }

    pub fn horizon(&self) -> usize {
        self.diag.len()
    }

    pub fn mean_value(&self) -> f64 {
        self.level
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diag(&self) -> f64 {
        self.off
    }

    /// `y = Q x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let t_len = self.diag.len();
        debug_assert_eq!(x.len(), t_len);
        let mut y = vec![0.0; t_len];
        for t in 0..t_len {
            let mut acc = self.diag[t] * x[t];
            if t > 0 {
                acc += self.off * x[t - 1];
            }
            if t + 1 < t_len {
                acc += self.off * x[t + 1];
            }
            y[t] = acc;
        }
        y
    }

    /// `Q · (x0·1)`, the precision-weighted mean used in proposal shifts.
    pub fn precision_times_mean(&self) -> Vec<f64> {
        let ones = vec![self.level; self.diag.len()];
        self.matvec(&ones)
    }
}

/// One proposal draw for a single path:
/// `Y ~ N((I + (ζ/2)Q)⁻¹ (u + (ζ/2)QM), (ζ/2)(I + (ζ/2)Q)⁻¹)`,
/// computed as `Y = L⁻ᵀ(L⁻¹((2/ζ)u + QM) + z)` with `LLᵀ = (2/ζ)I + Q`
/// via the bidiagonal Cholesky factor — O(T) time and memory.
///
/// `z` must hold `horizon` independent standard normal draws; passing them
/// explicitly keeps the routine deterministic for oracle comparisons.
pub fn solve_and_sample_path(
    params: &PathParams,
    zeta: f64,
    u: &[f64],
    z: &[f64],
    out: &mut [f64],
) {
    assert!(zeta > 0.0, "step size must be positive");
    let horizon = u.len();
    debug_assert_eq!(z.len(), horizon);
    debug_assert_eq!(out.len(), horizon);
    let phi = params.phi();
    let inv_var = 1.0 / (params.innovation_sd * params.innovation_sd);
    let off = -phi * inv_var;
    let two_over_zeta = 2.0 / zeta;
    // The AR(1) precision pattern, written out to keep the loop
    // allocation-light: end rows have weight 1, interior 1+φ², and row sums
    // give Q·(x0·1) directly.
    let (q_end, q_mid, qm_end, qm_mid) = if horizon == 1 {
        let q = (1.0 - phi * phi) * inv_var;
        (q, q, q * params.level, q * params.level)
    } else {
        (
            inv_var,
            (1.0 + phi * phi) * inv_var,
            (1.0 - phi) * inv_var * params.level,
            (1.0 - phi) * (1.0 - phi) * inv_var * params.level,
        )
    };

    // Bidiagonal Cholesky of (2/ζ)I + Q and the forward solve, fused.
    let mut diag_l = vec![0.0; horizon];
    let mut sub_l = vec![0.0; horizon.saturating_sub(1)];
    for t in 0..horizon {
        let interior = t > 0 && t + 1 < horizon;
        let a = two_over_zeta + if interior { q_mid } else { q_end };
        let pivot = if t == 0 {
            a
        } else {
            sub_l[t - 1] = off / diag_l[t - 1];
            a - sub_l[t - 1] * sub_l[t - 1]
        };
        assert!(pivot > 0.0, "proposal precision lost positive definiteness");
        diag_l[t] = pivot.sqrt();
        let rhs = two_over_zeta * u[t] + if interior { qm_mid } else { qm_end };
        out[t] = if t == 0 {
            rhs / diag_l[0]
        } else {
            (rhs - sub_l[t - 1] * out[t - 1]) / diag_l[t]
        };
    }
    for t in 0..horizon {
        out[t] += z[t];
    }
    // Backward solve Lᵀ y = w.
    for t in (0..horizon).rev() {
        let mut w = out[t];
        if t + 1 < horizon {
            w -= sub_l[t] * out[t + 1];
        }
        out[t] = w / diag_l[t];
    }
}

/// Proposal draw for every path (see [`solve_and_sample_path`]); `params`
/// must carry one entry per path of `u`.
pub fn solve_and_sample<R: Rng + ?Sized>(
    params: &[PathParams],
    zeta: f64,
    u: &LatentPaths,
    rng: &mut R,
) -> LatentPaths {
    assert_eq!(params.len(), u.n_paths());
    let horizon = u.horizon();
    let mut out = LatentPaths::zeros(u.dim(), horizon);
    let mut z = vec![0.0; horizon];
    for (p, param) in params.iter().enumerate() {
        for zt in z.iter_mut() {
            *zt = rng.sample(StandardNormal);
        }
        solve_and_sample_path(param, zeta, u.row(p), &z, out.row_mut(p));
    }
    out
}

/// Exact forward draw from the AR(1) prior of a single path.
pub fn sample_prior_path<R: Rng + ?Sized>(
    params: &PathParams,
    horizon: usize,
    rng: &mut R,
    out: &mut [f64],
) {
    debug_assert_eq!(out.len(), horizon);
    let phi = params.phi();
    let sd = params.innovation_sd;
    let z0: f64 = rng.sample(StandardNormal);
    out[0] = params.level + params.stationary_variance().sqrt() * z0;
    for t in 1..horizon {
        let z: f64 = rng.sample(StandardNormal);
        out[t] = params.level + phi * (out[t - 1] - params.level) + sd * z;
    }
}

/// Exact draw of all paths from the prior; used for synthetic data and
/// prior-invariance tests.
pub fn sample_prior<R: Rng + ?Sized>(
    params: &[PathParams],
    dim: usize,
    horizon: usize,
    rng: &mut R,
) -> LatentPaths {
    assert_eq!(params.len(), n_paths_for_dim(dim));
    let mut paths = LatentPaths::zeros(dim, horizon);
    for (p, param) in params.iter().enumerate() {
        sample_prior_path(param, horizon, rng, paths.row_mut(p));
    }
    paths
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn angle_transform_center_and_limits() {
        assert_eq!(angle_from_delta(0.0), 0.0);
        assert!(angle_from_delta(1e4) < FRAC_PI_2);
        assert!(FRAC_PI_2 - angle_from_delta(1e4) < 1e-12);
        assert!(angle_from_delta(-1e4) > -FRAC_PI_2);
        assert_eq!(angle_from_delta(1e300), FRAC_PI_2.next_down());
        // δ = 1 → (π/2) tanh(1/2)
        assert_relative_eq!(angle_from_delta(1.0), FRAC_PI_2 * 0.5f64.tanh(), epsilon = 1e-15);
    }

    #[test]
    fn angle_transform_roundtrip() {
        for k in 0..200 {
            let omega = -FRAC_PI_2 + 1e-6 + (FRAC_PI_2 - 1e-6) * 2.0 * (k as f64) / 199.0;
            let omega = omega.clamp(-FRAC_PI_2 + 1e-6, FRAC_PI_2 - 1e-6);
            let back = angle_from_delta(delta_from_angle(omega));
            assert_relative_eq!(back, omega, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn dangle_matches_finite_difference() {
        for &delta in &[-3.0, -1.0, 0.0, 1.0, 2.5] {
            let eps = 1e-6;
            let fd = (angle_from_delta(delta + eps) - angle_from_delta(delta - eps)) / (2.0 * eps);
            assert_relative_eq!(dangle_ddelta(delta), fd, epsilon = 1e-8);
        }
        assert_relative_eq!(dangle_ddelta(0.0), core::f64::consts::FRAC_PI_4, epsilon = 1e-15);
        assert!(dangle_ddelta(50.0) < 1e-20);
        assert!(dangle_ddelta(-50.0) < 1e-20);
    }

    #[test]
    fn persistence_transform_properties() {
        assert_eq!(persistence_from_unconstrained(0.0), 0.0);
        let mut prev = -1.0;
        for k in -20..=20 {
            let phi = persistence_from_unconstrained(k as f64 * 0.5);
            assert!(phi > prev && phi.abs() < 1.0);
            prev = phi;
        }
        let phi = 0.95;
        assert_relative_eq!(
            persistence_from_unconstrained(unconstrained_from_persistence(phi)),
            phi,
            epsilon = 1e-14
        );
    }

    #[test]
    fn prior_log_density_single_point() {
        let params = PathParams::new(0.0, 0.0, 1.0);
        let mut paths = LatentPaths::zeros(1, 1);
        paths.set(0, 0, 0.0);
        assert_relative_eq!(
            prior_log_density(&paths, &[params]),
            -0.5 * crate::givens::LN_2PI,
            epsilon = 1e-15
        );
    }

    #[test]
    fn prior_log_density_factorizes_at_zero_persistence() {
        let params = PathParams::new(0.0, 0.3, 0.7);
        let xs = [0.1, -0.5, 0.9];
        let mut paths = LatentPaths::zeros(1, 3);
        paths.row_mut(0).copy_from_slice(&xs);
        let want: f64 = xs.iter().map(|x| normal_log_pdf(*x, 0.3, 0.49)).sum();
        assert_relative_eq!(prior_log_density(&paths, &[params]), want, epsilon = 1e-13);
    }

    #[test]
    fn tridiagonal_matches_ar1_quadratic_form() {
        // exp(-1/2 (x-m)ᵀQ(x-m)) · (2π)^{-T/2} |Q|^{1/2} must equal the
        // AR(1) factorized density; check via the quadratic form identity.
        let params = PathParams::new(1.2, -0.4, 0.6);
        let x = [0.2, -0.9, 0.1, -0.3, -0.6];
        let prec = TridiagonalGaussian::from_path_params(&params, 5);
        let centered: alloc::vec::Vec<f64> = x.iter().map(|v| v - params.level).collect();
        let quad = crate::linalg::dot(&centered, &prec.matvec(&centered));
        let phi = params.phi();
        let s2 = params.innovation_sd * params.innovation_sd;
        let mut want = (1.0 - phi * phi) * centered[0] * centered[0] / s2;
        for t in 1..5 {
            let d = centered[t] - phi * centered[t - 1];
            want += d * d / s2;
        }
        assert_relative_eq!(quad, want, epsilon = 1e-12);
    }

    #[test]
    fn horizon_one_precision_is_stationary() {
        let params = PathParams::new(2.0, 0.0, 0.5);
        let prec = TridiagonalGaussian::from_path_params(&params, 1);
        assert_relative_eq!(
            prec.diag()[0],
            1.0 / params.stationary_variance(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn sample_prior_moments() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let params = PathParams::new(unconstrained_from_persistence(0.95), 1.5, 0.2);
        let n = 400_000;
        let mut path = vec![0.0; n];
        sample_prior_path(&params, n, &mut rng, &mut path);
        let mean: f64 = path.iter().sum::<f64>() / n as f64;
        let var: f64 = path.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let lag1: f64 = path
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / (n - 1) as f64
            / var;
        let stat_var = params.stationary_variance();
        // With φ = 0.95 the effective sample count is n(1-φ)/(1+φ) ≈ n/39.
        let se_mean = (stat_var * (1.0 + 0.95) / (1.0 - 0.95) / n as f64).sqrt();
        assert!((mean - 1.5).abs() < 3.0 * se_mean, "mean {mean} off target");
        assert!((var - stat_var).abs() / stat_var < 0.05, "variance {var} vs {stat_var}");
        assert!((lag1 - 0.95).abs() < 0.01, "lag-1 autocorr {lag1}");
    }

    #[test]
    fn sample_prior_iid_case() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let params = PathParams::new(0.0, 0.0, 1.0);
        let n = 200_000;
        let mut path = vec![0.0; n];
        sample_prior_path(&params, n, &mut rng, &mut path);
        let mean: f64 = path.iter().sum::<f64>() / n as f64;
        let var: f64 = path.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn solve_and_sample_small_step_stays_near_u() {
        // ζ → 0⁺ collapses the proposal on u.
        let params = PathParams::new(1.0, 0.2, 0.5);
        let u = [0.4, -0.1, 0.8, 0.0];
        let z = [0.3, -1.1, 0.2, 0.9];
        let mut out = [0.0; 4];
        solve_and_sample_path(&params, 1e-10, &u, &z, &mut out);
        for (y, target) in out.iter().zip(u.iter()) {
            assert!((y - target).abs() < 1e-4, "{y} vs {target}");
        }
    }

    #[test]
    fn solve_and_sample_flat_prior_limit() {
        // σ → ∞ makes Q ≈ 0: mean → u, covariance → (ζ/2)I.
        let params = PathParams::new(0.0, 0.0, 1e8);
        let u = [1.0, -2.0, 0.5];
        let zeta = 0.8;
        let zero = [0.0; 3];
        let mut mean = [0.0; 3];
        solve_and_sample_path(&params, zeta, &u, &zero, &mut mean);
        for (m, target) in mean.iter().zip(u.iter()) {
            assert_relative_eq!(m, target, epsilon = 1e-10);
        }
        let z = [1.0, 0.0, -1.0];
        let mut draw = [0.0; 3];
        solve_and_sample_path(&params, zeta, &u, &z, &mut draw);
        for k in 0..3 {
            assert_relative_eq!(draw[k] - mean[k], (zeta / 2.0).sqrt() * z[k], epsilon = 1e-7);
        }
    }
}
