//! Predictive machinery: next-period covariance draws, particle-filter
//! predictive likelihoods, predictive Bayes factors, discrepancy measures
//! against a proxy matrix, and minimum-variance portfolio weights.
//!
//! Predictive likelihoods hold the static parameters fixed at their
//! posterior means and push a particle cloud of latent states through the
//! AR(1) transitions. The per-step estimate is the weighted average of
//! observation densities `N(r_t | 0, B Σ_t Bᵀ + σ²I)` over observed
//! components; differencing cumulative sums across two models gives the log
//! predictive Bayes factor. The observation density is evaluated through the
//! matrix inversion lemma so each particle costs O(K³ + N·K) rather than
//! O(N³).

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math in no_std builds; shadowed by std inherent methods under test
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::givens::{self, LN_2PI};
use crate::linalg::{cholesky, dot, LinalgError, Mat};
use crate::model::{PosteriorDraws, ReturnsPanel};
use crate::prior::{angle_from_delta, n_paths_for_dim, PathParams};

/// Errors from forecasting operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForecastError {
    /// No posterior draws to predict from.
    EmptyDraws,
    /// Operand dimensions do not agree.
    DimensionMismatch,
    /// A covariance input was not symmetric positive definite.
    NotPositiveDefinite,
    /// Forecast horizon must be 1 or 2.
    InvalidHorizon,
    /// Every particle weight vanished at the reported step.
    WeightCollapse { step: usize },
}

impl core::fmt::Display for ForecastError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ForecastError::EmptyDraws => write!(f, "no posterior draws available"),
            ForecastError::DimensionMismatch => write!(f, "dimension mismatch"),
            ForecastError::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            ForecastError::InvalidHorizon => write!(f, "forecast horizon must be 1 or 2"),
            ForecastError::WeightCollapse { step } => {
                write!(f, "all particle weights vanished at step {step}")
            }
        }
    }
}

impl core::error::Error for ForecastError {}

impl From<LinalgError> for ForecastError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NotPositiveDefinite => ForecastError::NotPositiveDefinite,
            LinalgError::DimensionMismatch => ForecastError::DimensionMismatch,
        }
    }
}

/// Draws of the next-period covariance.
#[derive(Clone, Debug)]
pub struct PredictiveDraws {
    /// Steps ahead (1 or 2).
    pub horizon: usize,
    /// Latent slice x at T+horizon, one per posterior draw.
    pub x_draws: Vec<Vec<f64>>,
    /// Implied Σ draws.
    pub sigma_draws: Vec<Mat>,
    /// Posterior predictive mean of Σ.
    pub mean_sigma: Mat,
}

fn transition_mean(params: &PathParams, x: f64) -> f64 {
    params.level + params.phi() * (x - params.level)
}

/// Simulates `x_{T+horizon}` forward through the AR(1) transitions for every
/// retained draw and reconstructs the implied covariance.
pub fn predict_sigma<R: Rng + ?Sized>(
    draws: &PosteriorDraws,
    horizon: usize,
    rng: &mut R,
) -> Result<PredictiveDraws, ForecastError> {
    if draws.n_draws() == 0 {
        return Err(ForecastError::EmptyDraws);
    }
    if horizon == 0 || horizon > 2 {
        return Err(ForecastError::InvalidHorizon);
    }
    let k = draws.n_factors;
    let n_paths = n_paths_for_dim(k);
    let n_active = if draws.independent_factors { k } else { n_paths };
    let mut x_draws = Vec::with_capacity(draws.n_draws());
    let mut sigma_draws = Vec::with_capacity(draws.n_draws());
    let mut mean_sigma = Mat::zeros(k, k);
    for s in 0..draws.n_draws() {
        let params = &draws.path_params[s];
        let mut x = draws.final_slice[s].clone();
        for _ in 0..horizon {
            for p in 0..n_active {
                let z: f64 = rng.sample(StandardNormal);
                x[p] = transition_mean(&params[p], x[p]) + params[p].innovation_sd * z;
            }
        }
        let sigma = sigma_from_slice(k, &x);
        for i in 0..k {
            for j in 0..k {
                let m = mean_sigma.at(i, j);
                mean_sigma.set(i, j, m + (sigma.at(i, j) - m) / (s + 1) as f64);
            }
        }
        x_draws.push(x);
        sigma_draws.push(sigma);
    }
    Ok(PredictiveDraws { horizon, x_draws, sigma_draws, mean_sigma })
}

/// Dense covariance from one latent slice (h rows then δ rows).
pub fn sigma_from_slice(k: usize, x: &[f64]) -> Mat {
    debug_assert_eq!(x.len(), n_paths_for_dim(k));
    let h = &x[..k];
    let omega: Vec<f64> = x[k..].iter().map(|d| angle_from_delta(*d)).collect();
    givens::reconstruct(h, &omega)
}

/// Static parameters held fixed during prediction, taken as posterior means
/// (persistences averaged on the unconstrained scale, variances on the log
/// scale).
#[derive(Clone, Debug)]
pub struct FixedParams {
    pub n_factors: usize,
    pub independent_factors: bool,
    pub path_params: Vec<PathParams>,
    pub loadings: Mat,
    pub sigma2: f64,
}

pub fn posterior_mean_params(draws: &PosteriorDraws) -> Result<FixedParams, ForecastError> {
    let n = draws.n_draws();
    if n == 0 {
        return Err(ForecastError::EmptyDraws);
    }
    let k = draws.n_factors;
    let n_paths = n_paths_for_dim(k);
    let mut path_params = Vec::with_capacity(n_paths);
    for p in 0..n_paths {
        let mut phi_tilde = 0.0;
        let mut level = 0.0;
        let mut log_var = 0.0;
        for s in 0..n {
            let pp = &draws.path_params[s][p];
            phi_tilde += pp.phi_tilde;
            level += pp.level;
            log_var += (pp.innovation_sd * pp.innovation_sd).ln();
        }
        let nf = n as f64;
        path_params.push(PathParams::new(
            phi_tilde / nf,
            level / nf,
            (log_var / nf).exp().sqrt(),
        ));
    }
    let loadings = if draws.loadings.is_empty() {
        Mat::identity(k)
    } else {
        let mut b = Mat::zeros(draws.loadings[0].rows(), k);
        for m in &draws.loadings {
            b.add_assign(m);
        }
        b.scale(1.0 / n as f64);
        b
    };
    let sigma2 = (draws.sigma2.iter().map(|s| s.ln()).sum::<f64>() / n as f64).exp();
    Ok(FixedParams {
        n_factors: k,
        independent_factors: draws.independent_factors,
        path_params,
        loadings,
        sigma2,
    })
}

/// A weighted cloud of latent-state particles.
#[derive(Clone, Debug)]
pub struct ParticleCloud {
    n_paths: usize,
    particles: Vec<f64>,
    weights: Vec<f64>,
}

impl ParticleCloud {
    /// Equal-weight cloud from explicit states.
    pub fn from_states(states: Vec<Vec<f64>>) -> Result<Self, ForecastError> {
        if states.is_empty() {
            return Err(ForecastError::EmptyDraws);
        }
        let n_paths = states[0].len();
        let n = states.len();
        let mut particles = Vec::with_capacity(n * n_paths);
        for s in &states {
            if s.len() != n_paths {
                return Err(ForecastError::DimensionMismatch);
            }
            particles.extend_from_slice(s);
        }
        Ok(ParticleCloud { n_paths, particles, weights: vec![1.0 / n as f64; n] })
    }

    /// Bootstrap a cloud of `n_particles` by resampling the posterior draws
    /// of the final latent slice with replacement.
    pub fn from_posterior<R: Rng + ?Sized>(
        draws: &PosteriorDraws,
        n_particles: usize,
        rng: &mut R,
    ) -> Result<Self, ForecastError> {
        if draws.n_draws() == 0 || n_particles == 0 {
            return Err(ForecastError::EmptyDraws);
        }
        let n_paths = draws.final_slice[0].len();
        let mut particles = Vec::with_capacity(n_particles * n_paths);
        for _ in 0..n_particles {
            let idx = rng.random_range(0..draws.n_draws());
            particles.extend_from_slice(&draws.final_slice[idx]);
        }
        Ok(ParticleCloud {
            n_paths,
            particles,
            weights: vec![1.0 / n_particles as f64; n_particles],
        })
    }

    pub fn n_particles(&self) -> usize {
        self.weights.len()
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn particle(&self, i: usize) -> &[f64] {
        &self.particles[i * self.n_paths..(i + 1) * self.n_paths]
    }

    #[inline]
    fn particle_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.particles[i * self.n_paths..(i + 1) * self.n_paths]
    }

    /// `1 / Σ wᵢ²`, the usual effective-sample-size of the weights.
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }
}

/// Particle filter flavour.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterVariant {
    /// Blind propagation, reweight, resample when ESS drops.
    Bootstrap,
    /// Look ahead by the transition mean, resample first, then correct.
    Auxiliary,
}

#[derive(Clone, Copy, Debug)]
pub struct ParticleFilterConfig {
    pub n_particles: usize,
    pub variant: FilterVariant,
    /// Bootstrap variant resamples when ESS < threshold × n_particles.
    pub resample_threshold: f64,
}

impl Default for ParticleFilterConfig {
    fn default() -> Self {
        ParticleFilterConfig {
            n_particles: 10_000,
            variant: FilterVariant::Auxiliary,
            resample_threshold: 0.5,
        }
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
    if !max.is_finite() {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Systematic resampling: one uniform draw, n evenly spaced positions.
fn systematic_resample<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let n = weights.len();
    let mut indices = Vec::with_capacity(n);
    let step = 1.0 / n as f64;
    let mut position = rng.random_range(0.0..step);
    let mut cumulative = weights[0];
    let mut j = 0usize;
    for _ in 0..n {
        while position > cumulative && j + 1 < n {
            j += 1;
            cumulative += weights[j];
        }
        indices.push(j);
        position += step;
    }
    indices
}

/// Observation-density evaluator for one future step: everything that does
/// not depend on the particle is precomputed once.
struct ObsDensity {
    k: usize,
    n_obs: usize,
    sigma2: f64,
    /// B_oᵀ B_o.
    btb: Mat,
    /// B_oᵀ r_o.
    btr: Vec<f64>,
    /// r_oᵀ r_o.
    rtr: f64,
}

impl ObsDensity {
    fn new(theta: &FixedParams, returns_row: &[f64], observed: &[usize]) -> Self {
        let k = theta.n_factors;
        let b = &theta.loadings;
        let mut btb = Mat::zeros(k, k);
        let mut btr = vec![0.0; k];
        let mut rtr = 0.0;
        for &n in observed {
            let row = b.row(n);
            let r = returns_row[n];
            rtr += r * r;
            for i in 0..k {
                btr[i] += row[i] * r;
                for j in 0..=i {
                    btb.set(i, j, btb.at(i, j) + row[i] * row[j]);
                }
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                btb.set(i, j, btb.at(j, i));
            }
        }
        ObsDensity { k, n_obs: observed.len(), sigma2: theta.sigma2, btb, btr, rtr }
    }

    /// `log N(r_o | 0, B_o Σ(x) B_oᵀ + σ²I)` via the inversion lemma:
    /// with `C = σ²Σ⁻¹ + B_oᵀB_o`,
    /// quad = σ⁻²rᵀr - σ⁻⁴ (Bᵀr)ᵀ C⁻¹ (Bᵀr) · σ² … collapsed below, and
    /// log det = (N_o - K) log σ² + Σᵢ hᵢ + log det C.
    fn log_density(&self, x: &[f64]) -> f64 {
        if self.n_obs == 0 {
            return 0.0;
        }
        let k = self.k;
        let h = &x[..k];
        let omega: Vec<f64> = x[k..].iter().map(|d| angle_from_delta(*d)).collect();
        let neg_h: Vec<f64> = h.iter().map(|v| -v).collect();
        let sigma_inv = givens::reconstruct(&neg_h, &omega);
        let mut c = self.btb.clone();
        for i in 0..k {
            for j in 0..k {
                c.set(i, j, c.at(i, j) + self.sigma2 * sigma_inv.at(i, j));
            }
        }
        let chol = match cholesky(&c) {
            Ok(f) => f,
            Err(_) => return f64::NEG_INFINITY,
        };
        let solved = chol.solve(&self.btr);
        let inv_s2 = 1.0 / self.sigma2;
        let quad = inv_s2 * self.rtr - inv_s2 * dot(&self.btr, &solved);
        let sum_h: f64 = h.iter().sum();
        let log_det =
            (self.n_obs as f64 - k as f64) * self.sigma2.ln() + sum_h + chol.log_det();
        -0.5 * (self.n_obs as f64 * LN_2PI + log_det + quad)
    }
}

fn propagate<R: Rng + ?Sized>(
    cloud: &mut ParticleCloud,
    theta: &FixedParams,
    n_active: usize,
    rng: &mut R,
) {
    for i in 0..cloud.n_particles() {
        let state = cloud.particle_mut(i);
        for p in 0..n_active {
            let z: f64 = rng.sample(StandardNormal);
            state[p] =
                transition_mean(&theta.path_params[p], state[p]) + theta.path_params[p].innovation_sd * z;
        }
    }
}

/// One-step-ahead predictive log-likelihoods `log p̂(r_t | r_{1:t-1}, θ̂)`
/// for each future observation row, mutating the cloud in place. The
/// cumulative predictive log-likelihood is the sum of the returned values.
pub fn predictive_loglik<R: Rng + ?Sized>(
    future: &ReturnsPanel,
    theta: &FixedParams,
    cloud: &mut ParticleCloud,
    cfg: &ParticleFilterConfig,
    rng: &mut R,
) -> Result<Vec<f64>, ForecastError> {
    let k = theta.n_factors;
    if cloud.n_paths() != n_paths_for_dim(k) {
        return Err(ForecastError::DimensionMismatch);
    }
    let n_active = if theta.independent_factors { k } else { n_paths_for_dim(k) };
    let n = cloud.n_particles();
    let obs_rows = future.observed_rows();
    let mut per_step = Vec::with_capacity(future.horizon());

    for t in 0..future.horizon() {
        let density = ObsDensity::new(theta, future.value_row(t), &obs_rows[t]);
        match cfg.variant {
            FilterVariant::Bootstrap => {
                propagate(cloud, theta, n_active, rng);
                let mut log_terms = vec![0.0; n];
                for i in 0..n {
                    log_terms[i] = cloud.weights[i].ln() + density.log_density(cloud.particle(i));
                }
                let step_ll = log_sum_exp(&log_terms);
                if !step_ll.is_finite() {
                    return Err(ForecastError::WeightCollapse { step: t });
                }
                for i in 0..n {
                    cloud.weights[i] = (log_terms[i] - step_ll).exp();
                }
                per_step.push(step_ll);
                if cloud.effective_sample_size() < cfg.resample_threshold * n as f64 {
                    let indices = systematic_resample(&cloud.weights, rng);
                    resample_in_place(cloud, &indices);
                }
            }
            FilterVariant::Auxiliary => {
                // First stage: weight by the density at the transition mean.
                let mut look_logs = vec![0.0; n];
                let mut lookahead = vec![0.0; cloud.n_paths()];
                for i in 0..n {
                    let state = cloud.particle(i);
                    lookahead.copy_from_slice(state);
                    for p in 0..n_active {
                        lookahead[p] = transition_mean(&theta.path_params[p], state[p]);
                    }
                    look_logs[i] = cloud.weights[i].ln() + density.log_density(&lookahead);
                }
                let first_stage = log_sum_exp(&look_logs);
                if !first_stage.is_finite() {
                    return Err(ForecastError::WeightCollapse { step: t });
                }
                let mut first_weights = vec![0.0; n];
                for i in 0..n {
                    first_weights[i] = (look_logs[i] - first_stage).exp();
                }
                let parents = systematic_resample(&first_weights, rng);
                let parent_logs: Vec<f64> = parents
                    .iter()
                    .map(|&p| look_logs[p] - cloud.weights[p].ln())
                    .collect();
                resample_in_place(cloud, &parents);
                propagate(cloud, theta, n_active, rng);
                // Second stage: correct by the ratio of exact to look-ahead density.
                let mut corrections = vec![0.0; n];
                for i in 0..n {
                    corrections[i] = density.log_density(cloud.particle(i)) - parent_logs[i];
                }
                let correction_sum = log_sum_exp(&corrections);
                if !correction_sum.is_finite() {
                    return Err(ForecastError::WeightCollapse { step: t });
                }
                per_step.push(first_stage + correction_sum - (n as f64).ln());
                for i in 0..n {
                    cloud.weights[i] = (corrections[i] - correction_sum).exp();
                }
            }
        }
    }
    Ok(per_step)
}

fn resample_in_place(cloud: &mut ParticleCloud, indices: &[usize]) {
    let n_paths = cloud.n_paths;
    let mut gathered = Vec::with_capacity(indices.len() * n_paths);
    for &idx in indices {
        gathered.extend_from_slice(&cloud.particles[idx * n_paths..(idx + 1) * n_paths]);
    }
    cloud.particles = gathered;
    let equal = 1.0 / indices.len() as f64;
    cloud.weights.clear();
    cloud.weights.resize(indices.len(), equal);
}

/// Log predictive Bayes factor of model A over model B from their cumulative
/// predictive log-likelihoods on the same hold-out window.
pub fn log_bayes_factor(cumulative_a: f64, cumulative_b: f64) -> f64 {
    cumulative_a - cumulative_b
}

/// Mean absolute deviation and root mean square error between a forecast and
/// a proxy matrix, over all N² ordered cells.
pub fn discrepancies(forecast: &Mat, proxy: &Mat) -> Result<(f64, f64), ForecastError> {
    if forecast.rows() != proxy.rows() || forecast.cols() != proxy.cols() {
        return Err(ForecastError::DimensionMismatch);
    }
    let n2 = (forecast.rows() * forecast.cols()) as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for (a, b) in forecast.as_slice().iter().zip(proxy.as_slice().iter()) {
        let d = (a - b).abs();
        abs_sum += d;
        sq_sum += d * d;
    }
    Ok((abs_sum / n2, (sq_sum / n2).sqrt()))
}

/// Minimum-variance portfolio weights `Σ⁻¹ι / ιᵀΣ⁻¹ι`; weights sum to one
/// and may be negative.
pub fn min_variance_weights(sigma: &Mat) -> Result<Vec<f64>, ForecastError> {
    if sigma.rows() != sigma.cols() {
        return Err(ForecastError::DimensionMismatch);
    }
    let chol = cholesky(sigma)?;
    let ones = vec![1.0; sigma.dim()];
    let mut w = chol.solve(&ones);
    let total: f64 = w.iter().sum();
    for wi in w.iter_mut() {
        *wi /= total;
    }
    Ok(w)
}
