//! Chain diagnostics: effective sample size.


#[allow(unused_imports)] // f64 math in no_std builds; shadowed by std inherent methods under test
use num_traits::Float;

/// Effective sample size of one scalar chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ess {
    /// The chain has (numerically) zero variance; ESS is undefined.
    Degenerate,
    Value(f64),
}

impl Ess {
    pub fn value(&self) -> Option<f64> {
        match self {
            Ess::Degenerate => None,
            Ess::Value(v) => Some(*v),
        }
    }
}

/// ESS via the initial monotone sequence estimator: autocovariances are
/// summed in adjacent pairs `Γ_m = γ_{2m} + γ_{2m+1}` for as long as the
/// pairs stay positive, with a running minimum enforcing monotonicity. The
/// asymptotic variance is `-γ₀ + 2 Σ Γ̃_m` and `ESS = n γ₀ / var`.
pub fn effective_sample_size(chain: &[f64]) -> Ess {
    let n = chain.len();
    if n < 4 {
        return Ess::Degenerate;
    }
    let mean: f64 = chain.iter().sum::<f64>() / n as f64;
    let gamma = |lag: usize| -> f64 {
        let mut acc = 0.0;
        for t in 0..(n - lag) {
            acc += (chain[t] - mean) * (chain[t + lag] - mean);
        }
        acc / n as f64
    };
    let gamma0 = gamma(0);
    let scale = chain.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    if gamma0 <= 1e-300 || gamma0 / (scale * scale) < 1e-30 {
        return Ess::Degenerate;
    }

    let mut var = -gamma0;
    let mut prev_pair = f64::INFINITY;
    let mut m = 0usize;
    while 2 * m + 1 < n {
        let pair = gamma(2 * m) + gamma(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        var += 2.0 * pair;
        prev_pair = pair;
        m += 1;
    }
    if var <= 0.0 {
        return Ess::Degenerate;
    }
    Ess::Value(n as f64 * gamma0 / var)
}
