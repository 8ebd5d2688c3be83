//! Dense reference implementations used as test oracles. Everything here is
//! deliberately written the slow O(K³) way, independent of the library's
//! recursion-based code paths.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub const LN_2PI: f64 = 1.8378770664093453;

/// Dense Givens rotation from the cell definition: identity except
/// `[i,i] = [j,j] = cos ω`, `[i,j] = sin ω`, `[j,i] = -sin ω`.
pub fn dense_givens(dim: usize, i: usize, j: usize, omega: f64) -> DMatrix<f64> {
    let mut g = DMatrix::identity(dim, dim);
    let (s, c) = omega.sin_cos();
    g[(i, i)] = c;
    g[(j, j)] = c;
    g[(i, j)] = s;
    g[(j, i)] = -s;
    g
}

/// Dense eigenvector matrix `P = G₀₁ G₀₂ … G₍ₖ₋₂₎₍ₖ₋₁₎` (lexicographic order,
/// leftmost first pair).
pub fn dense_p(dim: usize, angles: &[f64]) -> DMatrix<f64> {
    let mut p = DMatrix::identity(dim, dim);
    let mut m = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            p = p * dense_givens(dim, i, j, angles[m]);
            m += 1;
        }
    }
    assert_eq!(m, angles.len());
    p
}

/// Dense `Σ = P Λ Pᵀ`.
pub fn dense_sigma(h: &[f64], angles: &[f64]) -> DMatrix<f64> {
    let dim = h.len();
    let p = dense_p(dim, angles);
    let lambda = DMatrix::from_diagonal(&DVector::from_iterator(dim, h.iter().map(|x| x.exp())));
    &p * lambda * p.transpose()
}

/// Multivariate normal log-density at `r` for N(0, Σ), via dense Cholesky.
pub fn dense_mvn_logpdf(sigma: &DMatrix<f64>, r: &[f64]) -> f64 {
    let n = sigma.nrows();
    let chol = sigma.clone().cholesky().expect("oracle covariance must be SPD");
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let rv = DVector::from_column_slice(r);
    let solved = chol.solve(&rv);
    -0.5 * (n as f64 * LN_2PI + log_det + rv.dot(&solved))
}

/// Relative error with an absolute floor for near-zero references.
pub fn rel_err(got: f64, want: f64) -> f64 {
    let scale = want.abs().max(1e-12);
    (got - want).abs() / scale
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Random spectral parameters: log-eigenvalues in [-1.5, 1.5], angles well
/// inside the open interval.
pub fn random_spectral<R: Rng>(rng: &mut R, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let h = random_vec(rng, dim, -1.5, 1.5);
    let m = dim * (dim - 1) / 2;
    let angles = random_vec(rng, m, -1.4, 1.4);
    (h, angles)
}

/// Central finite difference of a scalar function.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (f(x + step) - f(x - step)) / (2.0 * step)
}
