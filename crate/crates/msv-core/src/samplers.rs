//! MCMC transition kernels.
//!
//! The centrepiece is the auxiliary Langevin update for the latent paths. It
//! introduces an intermediate Gaussian variable `U` around the
//! gradient-shifted current state and then proposes from the product of
//! `N(U, (ζ/2)I)` with the Gaussian prior, so the prior terms cancel from the
//! acceptance ratio:
//!
//! ```text
//! (i)  U ~ N(X + (ζ/2) D_x, (ζ/2) I),          D_x = ∇ log p(F|X)
//! (ii) Y ~ N((I + (ζ/2)Q)⁻¹ (U + (ζ/2)QM), (ζ/2)(I + (ζ/2)Q)⁻¹)
//!      accept with min(1, r),
//!      log r = log p(F|Y) - log p(F|X)
//!              - (U-X)ᵀD_x + (U-Y)ᵀD_y - (ζ/4)(‖D_y‖² - ‖D_x‖²).
//! ```
//!
//! Only the likelihood and its gradient appear; the prior enters solely
//! through the tridiagonal solve in step (ii). Setting the gradients to zero
//! gives the auxiliary random-walk variant. The same scheme updates each
//! latent factor vector, where the proposal covariance
//! `((2/ζ)I + Σ_t⁻¹)⁻¹ = P((2/ζ)I + Λ⁻¹)⁻¹Pᵀ` shares the eigenvectors of
//! `Σ_t`, so the draw needs only Givens applications — never a dense
//! factorization.
//!
//! The remaining kernels are standard conjugate blocks: loadings rows,
//! observation variance, per-path levels and innovation variances, a
//! random-walk Metropolis step for the transformed persistences, and the
//! Normal-Gamma hyper draw.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math in no_std builds; shadowed by std inherent methods under test
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::givens::{apply_rotations, apply_rotations_transpose, pair_count};
use crate::linalg::{cholesky, dot, Mat};
use crate::prior::{
    ar1_log_density, normal_log_pdf, solve_and_sample_path, InvGammaPrior, LatentPaths,
    NormalGammaPrior, PathParams,
};

/// Robbins-Monro decay exponent for all step-size adaptation.
pub const ADAPT_EXPONENT: f64 = 0.6;
/// Default acceptance target for gradient-using (Langevin) proposals.
pub const LANGEVIN_TARGET: f64 = 0.55;
/// Default acceptance target for random-walk proposals.
pub const RANDOM_WALK_TARGET: f64 = 0.25;

/// A positive scalar tuned by Robbins-Monro on the acceptance indicator:
/// `log s ← log s + n^{-0.6} (accepted - target)` while unfrozen.
#[derive(Clone, Copy, Debug)]
pub struct StepSizeAdapter {
    value: f64,
    target: f64,
    count: u64,
    frozen: bool,
    accepted_window: u64,
    attempted_window: u64,
}

impl StepSizeAdapter {
    pub fn new(initial: f64, target: f64) -> Self {
        assert!(initial > 0.0 && target > 0.0 && target < 1.0);
        StepSizeAdapter {
            value: initial,
            target,
            count: 0,
            frozen: false,
            accepted_window: 0,
            attempted_window: 0,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn frozen(&self) -> bool {
        self.frozen
    }

    /// Records one accept/reject outcome; adapts unless frozen.
    pub fn record(&mut self, accepted: bool) {
        self.attempted_window += 1;
        if accepted {
            self.accepted_window += 1;
        }
        if !self.frozen {
            self.count += 1;
            let gain = (self.count as f64).powf(-ADAPT_EXPONENT);
            let indicator = if accepted { 1.0 } else { 0.0 };
            self.value = (self.value.ln() + gain * (indicator - self.target)).exp();
        }
    }

    /// Stops adaptation; the proposal distribution is fixed from here on.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    /// Acceptance rate since the last [`Self::reset_window`].
    pub fn window_acceptance(&self) -> Option<f64> {
        if self.attempted_window == 0 {
            None
        } else {
            Some(self.accepted_window as f64 / self.attempted_window as f64)
        }
    }

    pub fn reset_window(&mut self) {
        self.accepted_window = 0;
        self.attempted_window = 0;
    }
}

/// State of one auxiliary Langevin (or random-walk) block.
#[derive(Clone, Copy, Debug)]
pub struct AuxLangevinState {
    pub step: StepSizeAdapter,
    pub use_gradient: bool,
}

impl AuxLangevinState {
    pub fn langevin(initial_zeta: f64) -> Self {
        AuxLangevinState {
            step: StepSizeAdapter::new(initial_zeta, LANGEVIN_TARGET),
            use_gradient: true,
        }
    }

    pub fn random_walk(initial_zeta: f64) -> Self {
        AuxLangevinState {
            step: StepSizeAdapter::new(initial_zeta, RANDOM_WALK_TARGET),
            use_gradient: false,
        }
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.step.target = target;
        self
    }

    pub fn zeta(&self) -> f64 {
        self.step.value()
    }

    /// Records the outcome of one step, adapting ζ during burn-in.
    pub fn adapt_step_size(&mut self, accepted: bool) {
        self.step.record(accepted);
    }
}

/// Likelihood contract for the latent-path update: `log p(F|X)` and its
/// gradient in the same path layout. Implementations must keep value and
/// gradient consistent (finite-difference testable).
pub trait LogLikelihood {
    fn value(&self, x: &LatentPaths) -> f64;

    /// Returns the value and fills `grad` (same shape as `x`).
    fn value_and_grad(&self, x: &LatentPaths, grad: &mut LatentPaths) -> f64;
}

fn active_dot(a: &LatentPaths, b: &LatentPaths, n_active: usize) -> f64 {
    let mut acc = 0.0;
    for p in 0..n_active {
        acc += dot(a.row(p), b.row(p));
    }
    acc
}

fn active_sq_norm(a: &LatentPaths, n_active: usize) -> f64 {
    let mut acc = 0.0;
    for p in 0..n_active {
        acc += dot(a.row(p), a.row(p));
    }
    acc
}

/// One auxiliary Langevin update of all active latent paths.
///
/// `prior` supplies the AR(1) parameters per path; only rows `< n_active`
/// are proposed (frozen rows — the angle paths of an independent-factor
/// model — pass through unchanged). A non-finite likelihood at the proposal
/// rejects automatically. Exactly one likelihood-and-gradient evaluation is
/// made at the proposed point per step; the Gaussian prior density is never
/// evaluated.
pub fn aux_langevin_step<L: LogLikelihood, R: Rng + ?Sized>(
    x: &mut LatentPaths,
    lik: &L,
    prior: &[PathParams],
    n_active: usize,
    state: &AuxLangevinState,
    rng: &mut R,
) -> bool {
    #[cfg(debug_assertions)]
    let prior_evals_before = crate::instrument::prior_density_evals();
    let accepted = aux_langevin_step_inner(x, lik, prior, n_active, state, rng);
    #[cfg(debug_assertions)]
    debug_assert_eq!(
        crate::instrument::prior_density_evals(),
        prior_evals_before,
        "the auxiliary Langevin step must never evaluate the prior density"
    );
    accepted
}

fn aux_langevin_step_inner<L: LogLikelihood, R: Rng + ?Sized>(
    x: &mut LatentPaths,
    lik: &L,
    prior: &[PathParams],
    n_active: usize,
    state: &AuxLangevinState,
    rng: &mut R,
) -> bool {
    let horizon = x.horizon();
    debug_assert!(n_active <= x.n_paths());
    debug_assert_eq!(prior.len(), x.n_paths());
    let zeta = state.zeta();

    let mut grad_x = LatentPaths::zeros(x.dim(), horizon);
    let logp_x = if state.use_gradient {
        lik.value_and_grad(x, &mut grad_x)
    } else {
        lik.value(x)
    };

    // (i) U ~ N(X + (ζ/2) D_x, (ζ/2) I) on active rows.
    let mut u = LatentPaths::zeros(x.dim(), horizon);
    let noise_sd = (0.5 * zeta).sqrt();
    for p in 0..n_active {
        let xr = x.row(p);
        let gr = grad_x.row(p);
        let ur = u.row_mut(p);
        for t in 0..horizon {
            let z: f64 = rng.sample(StandardNormal);
            ur[t] = xr[t] + 0.5 * zeta * gr[t] + noise_sd * z;
        }
    }

    // (ii) Y from the prior-invariant proposal, path by path in O(T).
    let mut y = x.clone();
    let mut z = vec![0.0; horizon];
    for p in 0..n_active {
        for zt in z.iter_mut() {
            *zt = rng.sample(StandardNormal);
        }
        solve_and_sample_path(&prior[p], zeta, u.row(p), &z, y.row_mut(p));
    }

    let mut grad_y = LatentPaths::zeros(x.dim(), horizon);
    let logp_y = if state.use_gradient {
        lik.value_and_grad(&y, &mut grad_y)
    } else {
        lik.value(&y)
    };
    if !logp_y.is_finite() {
        return false;
    }

    // log r per the cancelled-prior acceptance ratio.
    let mut log_r = logp_y - logp_x;
    log_r -= active_dot(&u, &grad_x, n_active) - active_dot(x, &grad_x, n_active);
    log_r += active_dot(&u, &grad_y, n_active) - active_dot(&y, &grad_y, n_active);
    log_r -= 0.25 * zeta * (active_sq_norm(&grad_y, n_active) - active_sq_norm(&grad_x, n_active));

    let uniform: f64 = rng.random();
    if uniform.ln() < log_r {
        *x = y;
        true
    } else {
        false
    }
}

/// Observation-side quantities for one time slice of the factor model:
/// the rows of `B` and entries of `r_t` that are actually observed.
pub struct SliceObservation<'a> {
    pub loadings: &'a Mat,
    pub returns_row: &'a [f64],
    pub observed: &'a [usize],
    pub sigma2: f64,
}

impl<'a> SliceObservation<'a> {
    /// `Σ_obs log N(r_n | (B f)_n, σ²)`.
    pub fn log_likelihood(&self, f: &[f64]) -> f64 {
        let mut lp = 0.0;
        for &n in self.observed {
            let mean = dot(self.loadings.row(n), f);
            lp += normal_log_pdf(self.returns_row[n], mean, self.sigma2);
        }
        lp
    }

    /// `D_f = σ⁻² B_oᵀ (r_o - B_o f)`.
    pub fn grad(&self, f: &[f64]) -> Vec<f64> {
        let k = self.loadings.cols();
        let mut g = vec![0.0; k];
        let inv_s2 = 1.0 / self.sigma2;
        for &n in self.observed {
            let resid = self.returns_row[n] - dot(self.loadings.row(n), f);
            for (gk, bk) in g.iter_mut().zip(self.loadings.row(n).iter()) {
                *gk += bk * resid * inv_s2;
            }
        }
        g
    }
}

/// Auxiliary Langevin update of one latent factor vector `f_t` with prior
/// `N(0, Σ_t)` in spectral form. The proposal covariance
/// `((2/ζ)I + Σ_t⁻¹)⁻¹` shares the eigenvectors of `Σ_t`, so the draw uses
/// only Givens applications and diagonal scalings: O(N_obs·K + K²), no dense
/// decomposition.
pub fn factor_step_metropolis<R: Rng + ?Sized>(
    f: &mut [f64],
    obs: &SliceObservation<'_>,
    log_eigenvalues: &[f64],
    angles: &[f64],
    zeta: f64,
    rng: &mut R,
) -> bool {
    #[cfg(debug_assertions)]
    let cholesky_calls_before = crate::instrument::dense_cholesky_calls();
    let accepted = factor_step_metropolis_inner(f, obs, log_eigenvalues, angles, zeta, rng);
    #[cfg(debug_assertions)]
    debug_assert_eq!(
        crate::instrument::dense_cholesky_calls(),
        cholesky_calls_before,
        "the Metropolis factor step must never use a dense factorization"
    );
    accepted
}

fn factor_step_metropolis_inner<R: Rng + ?Sized>(
    f: &mut [f64],
    obs: &SliceObservation<'_>,
    log_eigenvalues: &[f64],
    angles: &[f64],
    zeta: f64,
    rng: &mut R,
) -> bool {
    let k = f.len();
    debug_assert_eq!(log_eigenvalues.len(), k);
    debug_assert_eq!(angles.len(), pair_count(k));

    let logp_f = obs.log_likelihood(f);
    let grad_f = obs.grad(f);

    // (i) U ~ N(f + (ζ/2) D_f, (ζ/2) I).
    let noise_sd = (0.5 * zeta).sqrt();
    let mut u = vec![0.0; k];
    for i in 0..k {
        let z: f64 = rng.sample(StandardNormal);
        u[i] = f[i] + 0.5 * zeta * grad_f[i] + noise_sd * z;
    }

    // (ii) y = P [ λ' ∘ (Pᵀ (2/ζ) u) + sqrt(λ') ∘ z ],  λ'_i = 1/(2/ζ + e^{-h_i}).
    let two_over_zeta = 2.0 / zeta;
    let mut y: Vec<f64> = u.iter().map(|ui| two_over_zeta * ui).collect();
    apply_rotations_transpose(k, angles, &mut y);
    for i in 0..k {
        let lam = 1.0 / (two_over_zeta + (-log_eigenvalues[i]).exp());
        let z: f64 = rng.sample(StandardNormal);
        y[i] = lam * y[i] + lam.sqrt() * z;
    }
    apply_rotations(k, angles, &mut y);

    let logp_y = obs.log_likelihood(&y);
    if !logp_y.is_finite() {
        return false;
    }
    let grad_y = obs.grad(&y);

    let mut log_r = logp_y - logp_f;
    for i in 0..k {
        log_r -= (u[i] - f[i]) * grad_f[i];
        log_r += (u[i] - y[i]) * grad_y[i];
        log_r -= 0.25 * zeta * (grad_y[i] * grad_y[i] - grad_f[i] * grad_f[i]);
    }

    let uniform: f64 = rng.random();
    if uniform.ln() < log_r {
        f.copy_from_slice(&y);
        true
    } else {
        false
    }
}

/// Mean and precision of the exact conditional
/// `p(f_t | rest) = N(σ⁻² M⁻¹ B_oᵀ r_o, M⁻¹)` with `M = σ⁻²B_oᵀB_o + Σ_t⁻¹`.
pub fn factor_gibbs_conditional(
    obs: &SliceObservation<'_>,
    log_eigenvalues: &[f64],
    angles: &[f64],
) -> (Vec<f64>, Mat) {
    let k = log_eigenvalues.len();
    // Σ⁻¹ = P Λ⁻¹ Pᵀ is the reconstruction with negated log-eigenvalues.
    let neg_h: Vec<f64> = log_eigenvalues.iter().map(|h| -h).collect();
    let mut precision = crate::givens::reconstruct(&neg_h, angles);
    let inv_s2 = 1.0 / obs.sigma2;
    for &n in obs.observed {
        let row = obs.loadings.row(n);
        for i in 0..k {
            for j in 0..k {
                precision.set(i, j, precision.at(i, j) + inv_s2 * row[i] * row[j]);
            }
        }
    }
    let mut rhs = vec![0.0; k];
    for &n in obs.observed {
        let row = obs.loadings.row(n);
        for (ri, bi) in rhs.iter_mut().zip(row.iter()) {
            *ri += inv_s2 * bi * obs.returns_row[n];
        }
    }
    (rhs, precision)
}

/// Exact Gibbs draw of one factor vector via dense Cholesky — O(K³), kept as
/// the correctness oracle and small-problem fallback.
pub fn factor_step_gibbs<R: Rng + ?Sized>(
    f: &mut [f64],
    obs: &SliceObservation<'_>,
    log_eigenvalues: &[f64],
    angles: &[f64],
    rng: &mut R,
) {
    let k = f.len();
    let (rhs, precision) = factor_gibbs_conditional(obs, log_eigenvalues, angles);
    let chol = cholesky(&precision).expect("factor conditional precision must be SPD");
    let mean = chol.solve(&rhs);
    let mut z = vec![0.0; k];
    for zi in z.iter_mut() {
        *zi = rng.sample(StandardNormal);
    }
    f.copy_from_slice(&chol.precision_sample(&mean, &z));
}

/// Row-wise conjugate Gaussian update of the free factor loadings.
///
/// Row `n < K` is constrained to `b_nn = 1`, `b_nj = 0` for `j > n`, leaving
/// `n` free entries; rows `n ≥ K` are fully free. Missing cells contribute
/// nothing to a row's sufficient statistics. `factors` is T×K (one row per
/// time slice); `observed_rows[t]` lists the observed asset rows at `t`.
pub fn gibbs_loadings<R: Rng + ?Sized>(
    loadings: &mut Mat,
    factors: &Mat,
    returns: &Mat,
    observed_rows: &[Vec<usize>],
    sigma2: f64,
    prior_variance: f64,
    rng: &mut R,
) {
    let n_assets = loadings.rows();
    let k = loadings.cols();
    let horizon = factors.rows();
    debug_assert_eq!(returns.rows(), horizon);
    let inv_s2 = 1.0 / sigma2;
    let inv_prior = 1.0 / prior_variance;

    // Times at which each asset is observed.
    let mut times_for_asset: Vec<Vec<usize>> = vec![Vec::new(); n_assets];
    for (t, rows) in observed_rows.iter().enumerate() {
        for &n in rows {
            times_for_asset[n].push(t);
        }
    }

    for n in 0..n_assets {
        let n_free = if n < k { n } else { k };
        if n_free == 0 {
            continue;
        }
        let mut precision = Mat::zeros(n_free, n_free);
        for i in 0..n_free {
            precision.set(i, i, inv_prior);
        }
        let mut rhs = vec![0.0; n_free];
        for &t in &times_for_asset[n] {
            let f_row = factors.row(t);
            // Subtract the constrained unit loading's contribution.
            let target = if n < k {
                returns.at(t, n) - f_row[n]
            } else {
                returns.at(t, n)
            };
            for i in 0..n_free {
                rhs[i] += inv_s2 * f_row[i] * target;
                for j in 0..=i {
                    precision.set(i, j, precision.at(i, j) + inv_s2 * f_row[i] * f_row[j]);
                }
            }
        }
        for i in 0..n_free {
            for j in (i + 1)..n_free {
                precision.set(i, j, precision.at(j, i));
            }
        }
        let chol = cholesky(&precision).expect("loadings precision must be SPD");
        let mean = chol.solve(&rhs);
        let mut z = vec![0.0; n_free];
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let draw = chol.precision_sample(&mean, &z);
        for (j, v) in draw.iter().enumerate() {
            loadings.set(n, j, *v);
        }
    }
}

/// Draws `σ² ~ InvGamma(shape + n_obs/2, rate + Σ resid²/2)`.
pub fn gibbs_sigma2<R: Rng + ?Sized>(
    sum_sq_resid: f64,
    n_obs: usize,
    prior: &InvGammaPrior,
    rng: &mut R,
) -> f64 {
    let shape = prior.shape + 0.5 * n_obs as f64;
    let rate = prior.rate + 0.5 * sum_sq_resid;
    draw_inverse_gamma(shape, rate, rng)
}

/// Inverse-gamma draw with shape/rate parametrization.
pub fn draw_inverse_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    let gamma = Gamma::new(shape, 1.0 / rate).expect("valid gamma parameters");
    let g: f64 = gamma.sample(rng);
    1.0 / g
}

/// Gaussian conditional of the path level x0 under the flat prior: the AR(1)
/// quadratic form, including the stationary initial term, is quadratic in x0.
/// Returns (mean, variance).
pub fn path_level_conditional(path: &[f64], phi: f64, innovation_sd: f64) -> (f64, f64) {
    let horizon = path.len();
    let one_minus_phi2 = 1.0 - phi * phi;
    let one_minus_phi = 1.0 - phi;
    let mut weight = one_minus_phi2;
    let mut weighted_sum = one_minus_phi2 * path[0];
    for t in 1..horizon {
        let c = path[t] - phi * path[t - 1];
        weight += one_minus_phi * one_minus_phi;
        weighted_sum += one_minus_phi * c;
    }
    let s2 = innovation_sd * innovation_sd;
    (weighted_sum / weight, s2 / weight)
}

/// Inverse-gamma conditional of the innovation variance given (φ, x0):
/// shape `prior.shape + T/2`, rate `prior.rate + quad/2` with the full AR(1)
/// quadratic form. Returns (shape, rate).
pub fn path_variance_conditional(
    path: &[f64],
    phi: f64,
    level: f64,
    prior: &InvGammaPrior,
) -> (f64, f64) {
    let horizon = path.len();
    let mut quad = (1.0 - phi * phi) * (path[0] - level) * (path[0] - level);
    for t in 1..horizon {
        let resid = (path[t] - level) - phi * (path[t - 1] - level);
        quad += resid * resid;
    }
    (prior.shape + 0.5 * horizon as f64, prior.rate + 0.5 * quad)
}

/// Gibbs update of one path's level and innovation variance, in that order.
pub fn gibbs_path_level_and_variance<R: Rng + ?Sized>(
    path: &[f64],
    params: &PathParams,
    prior: &InvGammaPrior,
    rng: &mut R,
) -> PathParams {
    let phi = params.phi();
    let (mean, var) = path_level_conditional(path, phi, params.innovation_sd);
    let z: f64 = rng.sample(StandardNormal);
    let level = mean + var.sqrt() * z;
    let (shape, rate) = path_variance_conditional(path, phi, level, prior);
    let sigma2 = draw_inverse_gamma(shape, rate, rng);
    PathParams::new(params.phi_tilde, level, sigma2.sqrt())
}

/// Random-walk Metropolis update of one transformed persistence φ̃.
///
/// The acceptance ratio combines the AR(1) likelihood of the path (with its
/// stationary initial term) and the Gaussian prior `N(prior_mean,
/// 1/prior_precision)` on φ̃.
pub fn mh_persistence<R: Rng + ?Sized>(
    path: &[f64],
    params: &PathParams,
    prior_mean: f64,
    prior_precision: f64,
    proposal_sd: f64,
    rng: &mut R,
) -> (f64, bool) {
    let z: f64 = rng.sample(StandardNormal);
    let candidate = params.phi_tilde + proposal_sd * z;
    let cand_params = PathParams::new(candidate, params.level, params.innovation_sd);
    let prior_var = 1.0 / prior_precision;
    let log_r = ar1_log_density(path, &cand_params) - ar1_log_density(path, params)
        + normal_log_pdf(candidate, prior_mean, prior_var)
        - normal_log_pdf(params.phi_tilde, prior_mean, prior_var);
    let uniform: f64 = rng.random();
    if uniform.ln() < log_r {
        (candidate, true)
    } else {
        (params.phi_tilde, false)
    }
}

/// Normal-Gamma posterior parameters given a φ̃ sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalGammaPosterior {
    pub mu_n: f64,
    pub k_n: f64,
    pub alpha_n: f64,
    pub beta_n: f64,
}

pub fn normal_gamma_posterior(phi_tildes: &[f64], prior: &NormalGammaPrior) -> NormalGammaPosterior {
    let n = phi_tildes.len() as f64;
    assert!(n >= 1.0, "need at least one path");
    let mean: f64 = phi_tildes.iter().sum::<f64>() / n;
    let ss: f64 = phi_tildes.iter().map(|x| (x - mean) * (x - mean)).sum();
    let k_n = prior.k0 + n;
    NormalGammaPosterior {
        mu_n: (prior.k0 * prior.mu0 + n * mean) / k_n,
        k_n,
        alpha_n: prior.alpha0 + 0.5 * n,
        beta_n: prior.beta0
            + 0.5 * ss
            + 0.5 * prior.k0 * n * (mean - prior.mu0) * (mean - prior.mu0) / k_n,
    }
}

/// Conjugate draw of the exchangeable hyperparameters (μ, λ).
pub fn gibbs_hyper<R: Rng + ?Sized>(
    phi_tildes: &[f64],
    prior: &NormalGammaPrior,
    rng: &mut R,
) -> (f64, f64) {
    let post = normal_gamma_posterior(phi_tildes, prior);
    let gamma = Gamma::new(post.alpha_n, 1.0 / post.beta_n).expect("valid gamma parameters");
    let lambda: f64 = gamma.sample(rng);
    let z: f64 = rng.sample(StandardNormal);
    let mu = post.mu_n + z / (post.k_n * lambda).sqrt();
    (mu, lambda)
}
