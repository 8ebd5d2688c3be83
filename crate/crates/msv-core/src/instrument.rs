//! Debug-build counters used by tests to assert complexity contracts:
//! the auxiliary Langevin kernel must never evaluate the latent Gaussian
//! prior density, and the Metropolis factor step must never fall back to a
//! dense Cholesky decomposition. Counters compile to no-ops in release.

#[cfg(debug_assertions)]
use core::sync::atomic::{AtomicUsize, Ordering};

#[cfg(debug_assertions)]
static PRIOR_DENSITY_EVALS: AtomicUsize = AtomicUsize::new(0);
#[cfg(debug_assertions)]
static DENSE_CHOLESKY_CALLS: AtomicUsize = AtomicUsize::new(0);

#[inline]
pub(crate) fn record_prior_density_eval() {
    #[cfg(debug_assertions)]
    PRIOR_DENSITY_EVALS.fetch_add(1, Ordering::Relaxed);
}

#[inline]
pub(crate) fn record_dense_cholesky() {
    #[cfg(debug_assertions)]
    DENSE_CHOLESKY_CALLS.fetch_add(1, Ordering::Relaxed);
}

/// Number of latent-prior density evaluations so far (debug builds only;
/// always 0 in release).
pub fn prior_density_evals() -> usize {
    #[cfg(debug_assertions)]
    {
        PRIOR_DENSITY_EVALS.load(Ordering::Relaxed)
    }
    #[cfg(not(debug_assertions))]
    {
        0
    }
}

/// Number of dense Cholesky factorizations so far (debug builds only;
/// always 0 in release).
pub fn dense_cholesky_calls() -> usize {
    #[cfg(debug_assertions)]
    {
        DENSE_CHOLESKY_CALLS.load(Ordering::Relaxed)
    }
    #[cfg(not(debug_assertions))]
    {
        0
    }
}
