//! Dense-matrix and finite-difference oracles for the spectral kernels.

mod common;

use common::*;
use msv_core::givens::{
    self, givens_apply_transpose, log_density_and_grads, pair_count, GivensWork, PairIndex,
    SpectralCov,
};
use msv_core::prior::{angle_from_delta, dangle_ddelta};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[test]
fn apply_transpose_matches_dense_matrix() {
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let dim = 4;
    let pair = PairIndex::new(1, 3, dim);
    let omega = 0.3;
    let v = random_vec(&mut rng, dim, -2.0, 2.0);
    let dense = dense_givens(dim, pair.i, pair.j, omega).transpose() * DVector::from_column_slice(&v);
    let mut fast = v.clone();
    givens_apply_transpose(&mut fast, pair, omega);
    for k in 0..dim {
        assert!((fast[k] - dense[k]).abs() < 1e-14, "component {k}");
    }
}

#[test]
fn whiten_matches_dense_product() {
    let mut rng = ChaCha20Rng::seed_from_u64(102);
    for _ in 0..20 {
        let dim = 5;
        let (h, angles) = random_spectral(&mut rng, dim);
        let r = random_vec(&mut rng, dim, -3.0, 3.0);
        let cov = SpectralCov::new(h.clone(), angles.clone()).unwrap();
        let fast = cov.whiten(&r);
        let p = dense_p(dim, &angles);
        let scaled = DMatrix::from_diagonal(&DVector::from_iterator(
            dim,
            h.iter().map(|x| (-0.5 * x).exp()),
        ));
        let dense = scaled * p.transpose() * DVector::from_column_slice(&r);
        for k in 0..dim {
            assert!(
                (fast[k] - dense[k]).abs() < 1e-12,
                "whiten mismatch at {k}: {} vs {}",
                fast[k],
                dense[k]
            );
        }
    }
}

#[test]
fn log_density_matches_dense_cholesky() {
    let mut rng = ChaCha20Rng::seed_from_u64(103);
    for _ in 0..50 {
        let dim = 6;
        let (h, angles) = random_spectral(&mut rng, dim);
        let r = random_vec(&mut rng, dim, -3.0, 3.0);
        let cov = SpectralCov::new(h.clone(), angles.clone()).unwrap();
        let fast = cov.log_density(&r);
        let dense = dense_mvn_logpdf(&dense_sigma(&h, &angles), &r);
        assert!(
            rel_err(fast, dense) <= 1e-10,
            "log density {fast} vs dense {dense}"
        );
    }
}

#[test]
fn reconstruct_matches_dense_assembly() {
    let mut rng = ChaCha20Rng::seed_from_u64(104);
    for &dim in &[2usize, 3, 7] {
        let (h, angles) = random_spectral(&mut rng, dim);
        let cov = SpectralCov::new(h.clone(), angles.clone()).unwrap();
        let fast = cov.reconstruct();
        let dense = dense_sigma(&h, &angles);
        for i in 0..dim {
            for j in 0..dim {
                assert!((fast.at(i, j) - dense[(i, j)]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn grad_log_eigenvalues_matches_finite_differences() {
    let mut rng = ChaCha20Rng::seed_from_u64(105);
    let dim = 4;
    for _ in 0..20 {
        let (h, angles) = random_spectral(&mut rng, dim);
        let r = random_vec(&mut rng, dim, -2.0, 2.0);
        let cov = SpectralCov::new(h.clone(), angles.clone()).unwrap();
        let grad = cov.grad_log_eigenvalues(&r);
        for k in 0..dim {
            let fd = central_diff(
                |x| {
                    let mut hh = h.clone();
                    hh[k] = x;
                    SpectralCov::new(hh, angles.clone()).unwrap().log_density(&r)
                },
                h[k],
                1e-5,
            );
            assert!(
                rel_err(grad[k], fd) <= 1e-6 || (grad[k] - fd).abs() <= 1e-8,
                "grad h[{k}] {} vs fd {}",
                grad[k],
                fd
            );
        }
    }
}

#[test]
fn grad_angles_matches_finite_differences() {
    let mut rng = ChaCha20Rng::seed_from_u64(106);
    let dim = 3;
    for _ in 0..20 {
        let (h, angles) = random_spectral(&mut rng, dim);
        let r = random_vec(&mut rng, dim, -2.0, 2.0);
        let cov = SpectralCov::new(h.clone(), angles.clone()).unwrap();
        let grad = cov.grad_angles(&r);
        for m in 0..angles.len() {
            let fd = central_diff(
                |x| {
                    let mut ww = angles.clone();
                    ww[m] = x;
                    SpectralCov::new(h.clone(), ww).unwrap().log_density(&r)
                },
                angles[m],
                1e-5,
            );
            assert!(
                rel_err(grad[m], fd) <= 1e-6 || (grad[m] - fd).abs() <= 1e-8,
                "grad angle[{m}] {} vs fd {}",
                grad[m],
                fd
            );
        }
    }
}

/// O(K³) oracle: differentiate the whitening product explicitly, replacing
/// one rotation at a time by its element-wise derivative matrix.
fn dense_grad_angles(h: &[f64], angles: &[f64], r: &[f64]) -> Vec<f64> {
    let dim = h.len();
    let lambda_inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        h.iter().map(|x| (-0.5 * x).exp()),
    ));
    let rv = DVector::from_column_slice(r);
    // v = Λ^{-1/2} Pᵀ r with Pᵀ = (… G₀₂ᵀ G₀₁ᵀ).
    let p = dense_p(dim, angles);
    let v = &lambda_inv_sqrt * p.transpose() * &rv;
    let mut grads = vec![0.0; angles.len()];
    for target in 0..angles.len() {
        // d(Pᵀ)/dω_target r: product of transposes in application order with
        // the target factor replaced by d(Gᵀ)/dω.
        let mut acc = rv.clone();
        let mut m = 0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let factor = if m == target {
                    let (s, c) = angles[m].sin_cos();
                    let mut d = DMatrix::zeros(dim, dim);
                    // Derivative of the rotation cells; transposed application.
                    d[(i, i)] = -s;
                    d[(j, j)] = -s;
                    d[(i, j)] = c;
                    d[(j, i)] = -c;
                    d.transpose()
                } else {
                    dense_givens(dim, i, j, angles[m]).transpose()
                };
                acc = factor * acc;
                m += 1;
            }
        }
        let dv = &lambda_inv_sqrt * acc;
        grads[target] = -v.dot(&dv);
    }
    grads
}

#[test]
fn grad_angles_matches_dense_k8_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(107);
    let dim = 8;
    for _ in 0..5 {
        let (h, angles) = random_spectral(&mut rng, dim);
        let r = random_vec(&mut rng, dim, -2.0, 2.0);
        let cov = SpectralCov::new(h.clone(), angles.clone()).unwrap();
        let fast = cov.grad_angles(&r);
        let dense = dense_grad_angles(&h, &angles, &r);
        for m in 0..fast.len() {
            assert!(
                (fast[m] - dense[m]).abs() <= 1e-10 * dense[m].abs().max(1.0),
                "angle grad {m}: {} vs dense {}",
                fast[m],
                dense[m]
            );
        }
    }
}

#[test]
fn joint_evaluation_consistent_with_separate_calls() {
    let mut rng = ChaCha20Rng::seed_from_u64(108);
    let dim = 5;
    let (h, angles) = random_spectral(&mut rng, dim);
    let r = random_vec(&mut rng, dim, -2.0, 2.0);
    let cov = SpectralCov::new(h.clone(), angles.clone()).unwrap();
    let mut work = GivensWork::new(dim);
    let mut gh = vec![0.0; dim];
    let mut gw = vec![0.0; pair_count(dim)];
    let lp = log_density_and_grads(&h, &angles, &r, &mut work, &mut gh, &mut gw);
    assert!((lp - cov.log_density(&r)).abs() < 1e-13);
    let gh_sep = cov.grad_log_eigenvalues(&r);
    let gw_sep = cov.grad_angles(&r);
    for k in 0..dim {
        assert!((gh[k] - gh_sep[k]).abs() < 1e-14);
    }
    for m in 0..gw.len() {
        assert!((gw[m] - gw_sep[m]).abs() < 1e-14);
    }
}

#[test]
fn delta_chain_rule_matches_finite_differences() {
    // Gradients in δ space: grad_angles ∘ dω/dδ.
    let mut rng = ChaCha20Rng::seed_from_u64(109);
    let dim = 3;
    let h = random_vec(&mut rng, dim, -1.0, 1.0);
    let deltas = random_vec(&mut rng, pair_count(dim), -1.5, 1.5);
    let r = random_vec(&mut rng, dim, -2.0, 2.0);
    let logdens_of = |ds: &[f64]| {
        let angles: Vec<f64> = ds.iter().map(|d| angle_from_delta(*d)).collect();
        SpectralCov::new(h.clone(), angles).unwrap().log_density(&r)
    };
    let angles: Vec<f64> = deltas.iter().map(|d| angle_from_delta(*d)).collect();
    let cov = SpectralCov::new(h.clone(), angles).unwrap();
    let grad_omega = cov.grad_angles(&r);
    for m in 0..deltas.len() {
        let chain = grad_omega[m] * dangle_ddelta(deltas[m]);
        let fd = central_diff(
            |x| {
                let mut ds = deltas.clone();
                ds[m] = x;
                logdens_of(&ds)
            },
            deltas[m],
            1e-5,
        );
        assert!(
            rel_err(chain, fd) <= 1e-6 || (chain - fd).abs() <= 1e-8,
            "delta grad {m}: {chain} vs {fd}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstruct_is_spd(
        dim in 1usize..7,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (h, angles) = random_spectral(&mut rng, dim);
        let cov = SpectralCov::new(h.clone(), angles.clone()).unwrap();
        let sigma = cov.reconstruct();
        prop_assert!(sigma.is_symmetric(1e-12));
        let dense = DMatrix::from_row_slice(dim, dim, sigma.as_slice());
        let eig = dense.symmetric_eigenvalues();
        for ev in eig.iter() {
            prop_assert!(*ev > 0.0, "eigenvalue {ev} not positive");
        }
    }

    #[test]
    fn whiten_zero_angles_is_exact_scaling(
        dim in 1usize..9,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let h = random_vec(&mut rng, dim, -2.0, 2.0);
        let r = random_vec(&mut rng, dim, -3.0, 3.0);
        let cov = SpectralCov::new(h.clone(), vec![0.0; givens::pair_count(dim)]).unwrap();
        let v = cov.whiten(&r);
        for k in 0..dim {
            // Bit-exact: a zero rotation must not touch the data.
            prop_assert_eq!(v[k], r[k] * (-0.5 * h[k]).exp());
        }
    }

    #[test]
    fn log_density_agrees_with_dense_for_all_small_dims(
        dim in 2usize..10,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (h, angles) = random_spectral(&mut rng, dim);
        let r = random_vec(&mut rng, dim, -3.0, 3.0);
        let cov = SpectralCov::new(h.clone(), angles.clone()).unwrap();
        let fast = cov.log_density(&r);
        let dense = dense_mvn_logpdf(&dense_sigma(&h, &angles), &r);
        prop_assert!(rel_err(fast, dense) <= 1e-10);
    }
}
