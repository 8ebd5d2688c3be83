//! Agreement between the O(T) path update and an independent dense-algebra
//! implementation of the same proposal on a small toy posterior.

mod common;

use msv_core::diagnostics::effective_sample_size;
use msv_core::linalg::Mat;
use msv_core::model::FactorPathLikelihood;
use msv_core::prior::{
    sample_prior, unconstrained_from_persistence, LatentPaths, PathParams, TridiagonalGaussian,
};
use msv_core::samplers::{aux_langevin_step, AuxLangevinState, LogLikelihood};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

fn chain_mean_se(chain: &[f64]) -> (f64, f64) {
    let n = chain.len() as f64;
    let mean = chain.iter().sum::<f64>() / n;
    let var = chain.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let ess = effective_sample_size(chain).value().unwrap_or(4.0).max(4.0);
    (mean, (var / ess).sqrt())
}

/// Dense block-diagonal AR(1) precision over all paths.
fn dense_prior(params: &[PathParams], horizon: usize) -> (DMatrix<f64>, DVector<f64>) {
    let n = params.len() * horizon;
    let mut q = DMatrix::zeros(n, n);
    let mut mean = DVector::zeros(n);
    for (p, pp) in params.iter().enumerate() {
        let tri = TridiagonalGaussian::from_path_params(pp, horizon);
        let base = p * horizon;
        for t in 0..horizon {
            q[(base + t, base + t)] = tri.diag()[t];
            if t + 1 < horizon {
                q[(base + t, base + t + 1)] = tri.off_diag();
                q[(base + t + 1, base + t)] = tri.off_diag();
            }
            mean[base + t] = pp.level;
        }
    }
    (q, mean)
}

fn flatten(x: &LatentPaths) -> DVector<f64> {
    DVector::from_column_slice(x.values())
}

fn unflatten(v: &DVector<f64>, dim: usize, horizon: usize) -> LatentPaths {
    let mut x = LatentPaths::zeros(dim, horizon);
    x.values_mut().copy_from_slice(v.as_slice());
    x
}

/// One auxiliary Langevin step computed entirely with dense matrices.
#[allow(clippy::too_many_arguments)]
fn dense_aux_step<R: Rng>(
    x: &mut DVector<f64>,
    lik: &FactorPathLikelihood<'_>,
    q: &DMatrix<f64>,
    prior_mean: &DVector<f64>,
    zeta: f64,
    dim: usize,
    horizon: usize,
    rng: &mut R,
) -> bool {
    let n = x.len();
    let mut grad_x_paths = LatentPaths::zeros(dim, horizon);
    let logp_x = lik.value_and_grad(&unflatten(x, dim, horizon), &mut grad_x_paths);
    let grad_x = flatten(&grad_x_paths);

    let noise: DVector<f64> = DVector::from_iterator(n, (0..n).map(|_| {
        let z: f64 = rng.sample(StandardNormal);
        z * (0.5 * zeta).sqrt()
    }));
    let u = x.clone() + &grad_x * (0.5 * zeta) + noise;

    let a = DMatrix::identity(n, n) * (2.0 / zeta) + q;
    let chol = a.clone().cholesky().expect("proposal precision is SPD");
    let rhs = &u * (2.0 / zeta) + q * prior_mean;
    let mean = chol.solve(&rhs);
    let z: DVector<f64> = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let lt = chol.l().transpose();
    let y = mean + lt.solve_upper_triangular(&z).expect("triangular solve");

    let mut grad_y_paths = LatentPaths::zeros(dim, horizon);
    let logp_y = lik.value_and_grad(&unflatten(&y, dim, horizon), &mut grad_y_paths);
    let grad_y = flatten(&grad_y_paths);

    let log_r = logp_y - logp_x - (&u - &*x).dot(&grad_x) + (&u - &y).dot(&grad_y)
        - 0.25 * zeta * (grad_y.norm_squared() - grad_x.norm_squared());
    let uniform: f64 = rng.random();
    if uniform.ln() < log_r {
        *x = y;
        true
    } else {
        false
    }
}

#[test]
fn fast_chain_agrees_with_dense_reference_chain() {
    let dim = 2;
    let horizon = 30;
    let mut rng = ChaCha20Rng::seed_from_u64(71);
    let params = vec![
        PathParams::new(unconstrained_from_persistence(0.9), -0.3, 0.3),
        PathParams::new(unconstrained_from_persistence(0.85), 0.4, 0.35),
        PathParams::new(unconstrained_from_persistence(0.8), 0.0, 0.4),
    ];

    // Synthetic factors from the generative model.
    let x_true = sample_prior(&params, dim, horizon, &mut rng);
    let mut factors = Mat::zeros(horizon, dim);
    for t in 0..horizon {
        let cov = x_true.spectral_at(t);
        let sigma = cov.reconstruct();
        let l00 = sigma.at(0, 0).sqrt();
        let l10 = sigma.at(1, 0) / l00;
        let l11 = (sigma.at(1, 1) - l10 * l10).sqrt();
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        factors.set(t, 0, l00 * z0);
        factors.set(t, 1, l10 * z0 + l11 * z1);
    }
    let lik = FactorPathLikelihood::new(&factors);

    let burn = 4_000;
    let sweeps = 40_000;

    // Fast chain.
    let mut fast_stats = Vec::with_capacity(sweeps);
    {
        let mut rng = ChaCha20Rng::seed_from_u64(72);
        let mut x = LatentPaths::zeros(dim, horizon);
        let mut state = AuxLangevinState::langevin(0.3);
        for i in 0..burn + sweeps {
            let accepted = aux_langevin_step(&mut x, &lik, &params, 3, &state, &mut rng);
            state.adapt_step_size(accepted);
            if i == burn - 1 {
                state.step.freeze();
            }
            if i >= burn {
                fast_stats.push(lik.value(&x));
            }
        }
    }

    // Dense reference chain: same kernel, dense linear algebra throughout.
    let (q, prior_mean) = dense_prior(&params, horizon);
    let mut dense_stats = Vec::with_capacity(sweeps);
    {
        let mut rng = ChaCha20Rng::seed_from_u64(73);
        let mut x = flatten(&LatentPaths::zeros(dim, horizon));
        let mut state = AuxLangevinState::langevin(0.3);
        for i in 0..burn + sweeps {
            let accepted = dense_aux_step(
                &mut x,
                &lik,
                &q,
                &prior_mean,
                state.zeta(),
                dim,
                horizon,
                &mut rng,
            );
            state.adapt_step_size(accepted);
            if i == burn - 1 {
                state.step.freeze();
            }
            if i >= burn {
                dense_stats.push(lik.value(&unflatten(&x, dim, horizon)));
            }
        }
    }

    let (fast_mean, fast_se) = chain_mean_se(&fast_stats);
    let (dense_mean, dense_se) = chain_mean_se(&dense_stats);
    let tol = 3.0 * (fast_se * fast_se + dense_se * dense_se).sqrt();
    assert!(
        (fast_mean - dense_mean).abs() < tol,
        "posterior log-likelihood means differ: fast {fast_mean} (se {fast_se}) vs dense {dense_mean} (se {dense_se})"
    );
}
