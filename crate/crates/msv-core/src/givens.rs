//! Spectral covariance parametrization and its O(K²) kernels.
//!
//! A K×K covariance matrix is stored as `Σ = P Λ Pᵀ` with `Λ = diag(exp(h))`
//! and `P` a product of Givens rotations, one per coordinate pair `(i, j)`,
//! `i < j`, taken in lexicographic order with `G₁₂` leftmost:
//!
//! ```text
//! P = G₁₂ G₁₃ … G₁ₖ G₂₃ … G₍ₖ₋₁₎ₖ,          ω_ij ∈ (-π/2, π/2).
//! ```
//!
//! Each rotation differs from the identity only in the four cells
//! `[i,i] = [j,j] = cos ω`, `[i,j] = sin ω`, `[j,i] = -sin ω`. Applying one
//! transposed rotation to a vector is O(1), so the whitening transform
//! `v = Λ^{-1/2} Pᵀ r` costs O(K²), and the Gaussian log-density
//!
//! ```text
//! log N(r | 0, Σ) = -(K/2) log 2π - (1/2) Σᵢ hᵢ - (1/2) vᵀv
//! ```
//!
//! follows in O(K²) instead of the O(K³) of a dense Cholesky. Gradients with
//! respect to `h` and all angles share the same forward recursion and a
//! matching backward recursion, keeping the total at O(K²) per evaluation.
//!
//! All functions here are pure; callers may evaluate different time slices
//! concurrently.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math in no_std builds; shadowed by std inherent methods under test
use num_traits::Float;


pub(crate) const LN_2PI: f64 = 1.8378770664093453;

/// A coordinate pair `(i, j)` with `i < j`, identifying one rotation plane.
///
/// Pairs are ordered lexicographically: `(0,1), (0,2), …, (0,K-1), (1,2), …`.
/// Indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
}

impl PairIndex {
    /// Panics unless `i < j < dim`.
    pub fn new(i: usize, j: usize, dim: usize) -> Self {
        assert!(i < j && j < dim, "require i < j < dim, got ({i}, {j}) for dim {dim}");
        PairIndex { i, j }
    }

    /// Position of this pair in lexicographic order.
    pub fn flat(&self, dim: usize) -> usize {
        // Pairs with first index < i contribute (dim-1) + … + (dim-i) slots.
        let before = self.i * (2 * dim - self.i - 1) / 2;
        before + (self.j - self.i - 1)
    }

    /// Inverse of [`PairIndex::flat`].
    pub fn from_flat(flat: usize, dim: usize) -> Self {
        let mut i = 0;
        let mut offset = flat;
        loop {
            let row_len = dim - i - 1;
            if offset < row_len {
                return PairIndex { i, j: i + 1 + offset };
            }
            offset -= row_len;
            i += 1;
            assert!(i + 1 < dim, "flat index {flat} out of range for dim {dim}");
        }
    }
}

/// Number of rotation angles for dimension `dim`.
#[inline]
pub fn pair_count(dim: usize) -> usize {
    dim * (dim - 1) / 2
}

/// Iterates all pairs in lexicographic order.
pub fn pairs(dim: usize) -> impl Iterator<Item = PairIndex> {
    (0..dim).flat_map(move |i| ((i + 1)..dim).map(move |j| PairIndex { i, j }))
}

/// Validation errors for [`SpectralCov`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralCovError {
    /// Expected K(K-1)/2 angles for K log-eigenvalues.
    AngleCountMismatch { expected: usize, got: usize },
    /// An angle fell outside the open interval (-π/2, π/2).
    AngleOutOfRange { index: usize },
    /// A log-eigenvalue or angle was NaN or infinite.
    NonFinite,
}

impl core::fmt::Display for SpectralCovError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpectralCovError::AngleCountMismatch { expected, got } => {
                write!(f, "expected {expected} rotation angles, got {got}")
            }
            SpectralCovError::AngleOutOfRange { index } => {
                write!(f, "angle {index} outside (-pi/2, pi/2)")
            }
            SpectralCovError::NonFinite => write!(f, "non-finite parameter"),
        }
    }
}

impl core::error::Error for SpectralCovError {}

/// One time slice of the covariance process in spectral form: K
/// log-eigenvalues and K(K-1)/2 rotation angles in lexicographic pair order.
///
/// Any finite parameter vector maps to a symmetric positive definite matrix,
/// so the type carries no positivity constraint beyond the open angle
/// interval required for uniqueness.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCov {
    log_eigenvalues: Vec<f64>,
    angles: Vec<f64>,
}

impl SpectralCov {
    pub fn new(log_eigenvalues: Vec<f64>, angles: Vec<f64>) -> Result<Self, SpectralCovError> {
        let dim = log_eigenvalues.len();
        assert!(dim >= 1, "dimension must be at least 1");
        if angles.len() != pair_count(dim) {
            return Err(SpectralCovError::AngleCountMismatch {
                expected: pair_count(dim),
                got: angles.len(),
            });
        }
        if log_eigenvalues.iter().any(|h| !h.is_finite()) {
            return Err(SpectralCovError::NonFinite);
        }
        for (idx, w) in angles.iter().enumerate() {
            if !w.is_finite() {
                return Err(SpectralCovError::NonFinite);
            }
            if w.abs() >= core::f64::consts::FRAC_PI_2 {
                return Err(SpectralCovError::AngleOutOfRange { index: idx });
            }
        }
        Ok(SpectralCov { log_eigenvalues, angles })
    }

    /// Identity covariance of dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        SpectralCov {
            log_eigenvalues: vec![0.0; dim],
            angles: vec![0.0; pair_count(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.log_eigenvalues.len()
    }

    pub fn log_eigenvalues(&self) -> &[f64] {
        &self.log_eigenvalues
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// `v = Λ^{-1/2} Pᵀ r` in O(K²).
    pub fn whiten(&self, r: &[f64]) -> Vec<f64> {
        let mut v = r.to_vec();
        whiten_in_place(&self.log_eigenvalues, &self.angles, &mut v);
        v
    }

    /// `log N(r | 0, Σ)` in O(K²).
    pub fn log_density(&self, r: &[f64]) -> f64 {
        let v = self.whiten(r);
        log_density_from_whitened(&self.log_eigenvalues, &v)
    }

    /// Gradient of [`Self::log_density`] with respect to the log-eigenvalues.
    pub fn grad_log_eigenvalues(&self, r: &[f64]) -> Vec<f64> {
        let v = self.whiten(r);
        v.iter().map(|vi| 0.5 * (vi * vi - 1.0)).collect()
    }

    /// Gradient of [`Self::log_density`] with respect to all rotation angles,
    /// in lexicographic pair order, computed in O(K²) total.
    pub fn grad_angles(&self, r: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let mut work = GivensWork::new(dim);
        let mut grad_h = vec![0.0; dim];
        let mut grad_angles = vec![0.0; pair_count(dim)];
        log_density_and_grads(
            &self.log_eigenvalues,
            &self.angles,
            r,
            &mut work,
            &mut grad_h,
            &mut grad_angles,
        );
        grad_angles
    }

    /// Dense `Σ = P Λ Pᵀ`, for reporting and oracles only — O(K³).
    pub fn reconstruct(&self) -> crate::linalg::Mat {
        reconstruct(&self.log_eigenvalues, &self.angles)
    }
}

/// Applies `G_ij(angle)ᵀ` to `v` in place: only components `i` and `j` change.
#[inline]
pub fn givens_apply_transpose(v: &mut [f64], pair: PairIndex, angle: f64) {
    let (s, c) = angle.sin_cos();
    let ti = v[pair.i];
    let tj = v[pair.j];
    v[pair.i] = c * ti - s * tj;
    v[pair.j] = s * ti + c * tj;
}

/// Applies `G_ij(angle)` (not transposed) to `v` in place.
#[inline]
fn givens_apply(v: &mut [f64], i: usize, j: usize, c: f64, s: f64) {
    let ti = v[i];
    let tj = v[j];
    v[i] = c * ti + s * tj;
    v[j] = -s * ti + c * tj;
}

/// `v ← Pᵀ v`: all transposed rotations in lexicographic order.
pub fn apply_rotations_transpose(dim: usize, angles: &[f64], v: &mut [f64]) {
    debug_assert_eq!(angles.len(), pair_count(dim));
    let mut m = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let (s, c) = angles[m].sin_cos();
            let ti = v[i];
            let tj = v[j];
            v[i] = c * ti - s * tj;
            v[j] = s * ti + c * tj;
            m += 1;
        }
    }
}

/// `v ← P v`: all rotations in reverse lexicographic order.
pub fn apply_rotations(dim: usize, angles: &[f64], v: &mut [f64]) {
    debug_assert_eq!(angles.len(), pair_count(dim));
    let mut m = pair_count(dim);
    for i in (0..dim).rev() {
        for j in ((i + 1)..dim).rev() {
            m -= 1;
            let (s, c) = angles[m].sin_cos();
            givens_apply(v, i, j, c, s);
        }
    }
}

/// In-place whitening: `v ← Λ^{-1/2} Pᵀ v`.
pub fn whiten_in_place(log_eigenvalues: &[f64], angles: &[f64], v: &mut [f64]) {
    let dim = log_eigenvalues.len();
    apply_rotations_transpose(dim, angles, v);
    for (vi, h) in v.iter_mut().zip(log_eigenvalues.iter()) {
        *vi *= (-0.5 * h).exp();
    }
}

#[inline]
fn log_density_from_whitened(log_eigenvalues: &[f64], v: &[f64]) -> f64 {
    let k = log_eigenvalues.len() as f64;
    let sum_h: f64 = log_eigenvalues.iter().sum();
    let vtv: f64 = v.iter().map(|x| x * x).sum();
    -0.5 * (k * LN_2PI + sum_h + vtv)
}

/// Reusable buffers for the joint density/gradient evaluation.
///
/// Holds O(K²) state: per-pair rotation cosines/sines and the two components
/// of the prefix vector each rotation acted on, recorded during the forward
/// sweep and consumed by the backward sweep.
#[derive(Clone, Debug)]
pub struct GivensWork {
    dim: usize,
    v: Vec<f64>,
    back: Vec<f64>,
    cs: Vec<[f64; 2]>,
    wij: Vec<[f64; 2]>,
}

impl GivensWork {
    pub fn new(dim: usize) -> Self {
        let m = pair_count(dim);
        GivensWork {
            dim,
            v: vec![0.0; dim],
            back: vec![0.0; dim],
            cs: vec![[0.0; 2]; m],
            wij: vec![[0.0; 2]; m],
        }
    }

    fn ensure(&mut self, dim: usize) {
        if self.dim != dim {
            *self = GivensWork::new(dim);
        }
    }

    /// Whitened vector from the last evaluation.
    pub fn whitened(&self) -> &[f64] {
        &self.v
    }
}

/// Evaluates `log N(r | 0, Σ(h, ω))` together with both gradients in one
/// O(K²) pass.
///
/// `grad_h` receives `∂ log density / ∂h` (length K) and `grad_angles`
/// receives `∂ log density / ∂ω` in lexicographic pair order. The forward
/// recursion applies the transposed rotations to `r` while recording, for
/// every pair, the two vector components it read; the backward recursion
/// un-rotates `Λ⁻¹ Pᵀ r` and forms each angle derivative from four of the
/// recorded numbers, so every pair costs O(1) in both sweeps.
pub fn log_density_and_grads(
    log_eigenvalues: &[f64],
    angles: &[f64],
    r: &[f64],
    work: &mut GivensWork,
    grad_h: &mut [f64],
    grad_angles: &mut [f64],
) -> f64 {
    let dim = log_eigenvalues.len();
    debug_assert_eq!(angles.len(), pair_count(dim));
    debug_assert_eq!(r.len(), dim);
    debug_assert_eq!(grad_h.len(), dim);
    debug_assert_eq!(grad_angles.len(), pair_count(dim));
    work.ensure(dim);

    // Forward sweep: v ← Pᵀ r, recording per-pair state.
    work.v.copy_from_slice(r);
    let mut m = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let (s, c) = angles[m].sin_cos();
            let ti = work.v[i];
            let tj = work.v[j];
            work.cs[m] = [c, s];
            work.wij[m] = [ti, tj];
            work.v[i] = c * ti - s * tj;
            work.v[j] = s * ti + c * tj;
            m += 1;
        }
    }
    // Scale: v ← Λ^{-1/2} v; seed the backward vector with Λ^{-1} Pᵀ r.
    for idx in 0..dim {
        let inv_sqrt = (-0.5 * log_eigenvalues[idx]).exp();
        let u = work.v[idx];
        work.v[idx] = u * inv_sqrt;
        work.back[idx] = u * inv_sqrt * inv_sqrt;
    }

    for (g, vi) in grad_h.iter_mut().zip(work.v.iter()) {
        *g = 0.5 * (vi * vi - 1.0);
    }

    // Backward sweep: visit pairs in reverse order. Before pair m is
    // un-rotated, `back` equals G_{m+1} … G_{M-1} Λ⁻¹ Pᵀ r, which is exactly
    // the left factor of the pair-m derivative.
    for i in (0..dim).rev() {
        for j in ((i + 1)..dim).rev() {
            m -= 1;
            let [c, s] = work.cs[m];
            let [wi, wj] = work.wij[m];
            let ai = work.back[i];
            let aj = work.back[j];
            grad_angles[m] = ai * (s * wi + c * wj) + aj * (s * wj - c * wi);
            givens_apply(&mut work.back, i, j, c, s);
        }
    }

    log_density_from_whitened(log_eigenvalues, &work.v)
}

/// Dense reconstruction `Σ = P Λ Pᵀ` (row-major), O(K³).
pub fn reconstruct(log_eigenvalues: &[f64], angles: &[f64]) -> crate::linalg::Mat {
    let dim = log_eigenvalues.len();
    debug_assert_eq!(angles.len(), pair_count(dim));
    // Assemble P by right-multiplying rotations in lexicographic order.
    let mut p = crate::linalg::Mat::identity(dim);
    let mut m = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let (s, c) = angles[m].sin_cos();
            for row in 0..dim {
                let pi = p.at(row, i);
                let pj = p.at(row, j);
                p.set(row, i, c * pi - s * pj);
                p.set(row, j, s * pi + c * pj);
            }
            m += 1;
        }
    }
    let lambda: Vec<f64> = log_eigenvalues.iter().map(|h| h.exp()).collect();
    let mut sigma = crate::linalg::Mat::zeros(dim, dim);
    for a in 0..dim {
        for b in a..dim {
            let mut acc = 0.0;
            for k in 0..dim {
                acc += p.at(a, k) * lambda[k] * p.at(b, k);
            }
            sigma.set(a, b, acc);
            sigma.set(b, a, acc);
        }
    }
    sigma
}
