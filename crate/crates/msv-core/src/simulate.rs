//! Synthetic panel generation from the generative model, for testing and
//! benchmarking.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math in no_std builds; shadowed by std inherent methods under test
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::givens::{apply_rotations, pair_count};
use crate::linalg::Mat;
use crate::model::{ModelError, PanelError, ReturnsPanel};
use crate::prior::{
    angle_from_delta, n_paths_for_dim, sample_prior, unconstrained_from_persistence, LatentPaths,
    PathParams,
};

/// Ground truth used to generate a synthetic panel.
#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub n_factors: usize,
    pub n_assets: usize,
    pub horizon: usize,
    pub path_params: Vec<PathParams>,
    /// Loadings with the identification pattern already in place.
    pub loadings: Mat,
    pub sigma2: f64,
    /// Independent per-cell missing probability.
    pub missing_fraction: f64,
    /// Zero all rotation angles (independent-factor generator).
    pub independent_factors: bool,
}

impl SyntheticSpec {
    /// A reasonable default truth: slowly varying volatility (persistences
    /// 0.97-0.985, small innovations), eigenvalue levels spread around
    /// log-unit variance, mildly rotated.
    pub fn default_for(n_factors: usize, n_assets: usize, horizon: usize) -> Self {
        assert!(n_factors >= 1 && n_assets >= n_factors && horizon >= 1);
        let n_paths = n_paths_for_dim(n_factors);
        let mut path_params = Vec::with_capacity(n_paths);
        for p in 0..n_paths {
            let phi = 0.97;
            let (level, sd) = if p < n_factors {
                // Separated log-eigenvalue levels keep the rotation planes
                // identifiable.
                ((p as f64 - 0.5 * (n_factors - 1) as f64) * 0.7, 0.07)
            } else {
                // Angle-path levels away from zero give persistent
                // correlations.
                (0.6 * if p % 2 == 0 { 1.0 } else { -0.9 }, 0.08)
            };
            path_params.push(PathParams::new(unconstrained_from_persistence(phi), level, sd));
        }
        let mut loadings = Mat::zeros(n_assets, n_factors);
        for i in 0..n_assets {
            for j in 0..n_factors {
                if i == j {
                    loadings.set(i, j, 1.0);
                } else if i > j || i >= n_factors {
                    // Deterministic spread in (-0.8, 0.8).
                    let v = (((i * 7 + j * 13) % 17) as f64 / 8.0) - 1.0;
                    loadings.set(i, j, 0.8 * v);
                }
            }
        }
        SyntheticSpec {
            n_factors,
            n_assets,
            horizon,
            path_params,
            loadings,
            sigma2: 0.01,
            missing_fraction: 0.0,
            independent_factors: false,
        }
    }
}

/// A generated panel together with its latent truth.
#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub panel: ReturnsPanel,
    pub paths: LatentPaths,
    pub factors: Mat,
}

/// Draws `f ~ N(0, P Λ Pᵀ)` from the spectral form in O(K²).
pub fn draw_factor<R: Rng + ?Sized>(
    log_eigenvalues: &[f64],
    angles: &[f64],
    rng: &mut R,
    out: &mut [f64],
) {
    for (o, h) in out.iter_mut().zip(log_eigenvalues.iter()) {
        let z: f64 = rng.sample(StandardNormal);
        *o = (0.5 * h).exp() * z;
    }
    apply_rotations(log_eigenvalues.len(), angles, out);
}

/// Simulates latent paths, factors, and returns from the generative model.
pub fn simulate_panel<R: Rng + ?Sized>(
    spec: &SyntheticSpec,
    rng: &mut R,
) -> Result<SyntheticData, ModelError> {
    let k = spec.n_factors;
    let n = spec.n_assets;
    let horizon = spec.horizon;
    if spec.path_params.len() != n_paths_for_dim(k) {
        return Err(ModelError::InvalidConfig(alloc::format!(
            "expected {} path parameter sets, got {}",
            n_paths_for_dim(k),
            spec.path_params.len()
        )));
    }
    if !(0.0..1.0).contains(&spec.missing_fraction) {
        return Err(ModelError::InvalidConfig(alloc::string::String::from(
            "missing fraction must lie in [0, 1)",
        )));
    }

    let mut paths = sample_prior(&spec.path_params, k, horizon, rng);
    if spec.independent_factors {
        for p in k..paths.n_paths() {
            paths.row_mut(p).fill(0.0);
        }
    }

    let mut factors = Mat::zeros(horizon, k);
    let mut h = vec![0.0; k];
    let mut delta = vec![0.0; pair_count(k)];
    let mut omega = vec![0.0; pair_count(k)];
    for t in 0..horizon {
        paths.read_slice(t, &mut h, &mut delta);
        for (w, d) in omega.iter_mut().zip(delta.iter()) {
            *w = angle_from_delta(*d);
        }
        draw_factor(&h, &omega, rng, factors.row_mut(t));
    }

    let noise_sd = spec.sigma2.sqrt();
    let mut values = vec![0.0; horizon * n];
    let mut observed = vec![true; horizon * n];
    for t in 0..horizon {
        let f_row = factors.row(t);
        for a in 0..n {
            let mean = crate::linalg::dot(spec.loadings.row(a), f_row);
            let z: f64 = rng.sample(StandardNormal);
            values[t * n + a] = mean + noise_sd * z;
            if spec.missing_fraction > 0.0 {
                let u: f64 = rng.random();
                if u < spec.missing_fraction {
                    observed[t * n + a] = false;
                }
            }
        }
    }
    // Every column needs at least one observation.
    for a in 0..n {
        if (0..horizon).all(|t| !observed[t * n + a]) {
            let t = rng.random_range(0..horizon);
            observed[t * n + a] = true;
        }
    }

    let panel = ReturnsPanel::new(horizon, n, values, observed).map_err(|e: PanelError| {
        ModelError::InvalidConfig(alloc::format!("generated panel invalid: {e}"))
    })?;
    Ok(SyntheticData { panel, paths, factors })
}
