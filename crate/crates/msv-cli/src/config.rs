//! Run configuration: a flat key=value file plus command-line overrides.
//!
//! Every tunable default of the library is exposed as a key so a manifest
//! echo of the resolved configuration reproduces the run exactly. Unknown
//! keys are rejected rather than ignored.

use std::collections::BTreeMap;

use msv_core::forecast::{FilterVariant, ParticleFilterConfig};
use msv_core::model::{FactorUpdate, ModelConfig, ModelMode};
use msv_core::prior::{InvGammaPrior, NormalGammaPrior, PriorMode};

use crate::error::CliError;

/// Everything a run needs beyond file paths.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub chains: usize,
    pub model: ModelConfig,
    pub forecast_horizon: usize,
    pub particles: usize,
    pub filter: FilterVariant,
    pub resample_threshold: f64,
    /// Emit per-day volatility/correlation panels from `fit`.
    pub emit_panels: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            chains: 1,
            model: ModelConfig::basic(1),
            forecast_horizon: 1,
            particles: 10_000,
            filter: FilterVariant::Auxiliary,
            resample_threshold: 0.5,
            emit_panels: true,
        }
    }
}

impl RunConfig {
    pub fn particle_filter_config(&self) -> ParticleFilterConfig {
        ParticleFilterConfig {
            n_particles: self.particles,
            variant: self.filter,
            resample_threshold: self.resample_threshold,
        }
    }

    /// All keys with their current values, for the manifest echo.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let m = &self.model;
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            map.insert(k.to_string(), v);
        };
        put("seed", self.seed.to_string());
        put("chains", self.chains.to_string());
        put("factors", m.n_factors.to_string());
        put(
            "mode",
            match m.mode {
                ModelMode::Basic => "basic".into(),
                ModelMode::Factor => "factor".into(),
            },
        );
        put(
            "prior",
            match m.prior_mode {
                PriorMode::Exchangeable => "exchangeable".into(),
                PriorMode::Independent => "independent".into(),
            },
        );
        put("independent_factors", m.independent_factors.to_string());
        put("use_gradient", m.use_gradient.to_string());
        put(
            "factor_update",
            match m.factor_update {
                FactorUpdate::Metropolis => "metropolis".into(),
                FactorUpdate::Gibbs => "gibbs".into(),
            },
        );
        put("burn_in", m.burn_in.to_string());
        put("sampling", m.sampling.to_string());
        put("thinning", m.thinning.to_string());
        put("loadings_prior_variance", m.loadings_prior_variance.to_string());
        put("sigma2_prior_shape", m.sigma2_prior.shape.to_string());
        put("sigma2_prior_rate", m.sigma2_prior.rate.to_string());
        put("innovation_prior_shape", m.innovation_prior.shape.to_string());
        put("innovation_prior_rate", m.innovation_prior.rate.to_string());
        put("ng_mu0", m.normal_gamma.mu0.to_string());
        put("ng_k0", m.normal_gamma.k0.to_string());
        put("ng_alpha0", m.normal_gamma.alpha0.to_string());
        put("ng_beta0", m.normal_gamma.beta0.to_string());
        put("langevin_target", m.langevin_target.to_string());
        put("random_walk_target", m.random_walk_target.to_string());
        put("persistence_target", m.persistence_target.to_string());
        put("initial_zeta", m.initial_zeta.to_string());
        put("initial_factor_zeta", m.initial_factor_zeta.to_string());
        put("initial_persistence_sd", m.initial_persistence_sd.to_string());
        put("store_sigma_means", m.store_sigma_means.to_string());
        put("store_full_paths", m.store_full_paths.to_string());
        put("store_factor_draws", m.store_factor_draws.to_string());
        put("forecast_horizon", self.forecast_horizon.to_string());
        put("particles", self.particles.to_string());
        put(
            "filter",
            match self.filter {
                FilterVariant::Auxiliary => "auxiliary".into(),
                FilterVariant::Bootstrap => "bootstrap".into(),
            },
        );
        put("resample_threshold", self.resample_threshold.to_string());
        put("emit_panels", self.emit_panels.to_string());
        map
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Config(format!("invalid value '{value}' for {what}"));
        let m = &mut self.model;
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "chains" => self.chains = value.parse().map_err(|_| bad("chains"))?,
            "factors" => m.n_factors = value.parse().map_err(|_| bad("factors"))?,
            "mode" => {
                m.mode = match value {
                    "basic" => ModelMode::Basic,
                    "factor" => ModelMode::Factor,
                    _ => return Err(bad("mode (basic|factor)")),
                }
            }
            "prior" => {
                m.prior_mode = match value {
                    "exchangeable" => PriorMode::Exchangeable,
                    "independent" => PriorMode::Independent,
                    _ => return Err(bad("prior (exchangeable|independent)")),
                }
            }
            "independent_factors" => {
                m.independent_factors = value.parse().map_err(|_| bad("independent_factors"))?
            }
            "use_gradient" => m.use_gradient = value.parse().map_err(|_| bad("use_gradient"))?,
            "factor_update" => {
                m.factor_update = match value {
                    "metropolis" => FactorUpdate::Metropolis,
                    "gibbs" => FactorUpdate::Gibbs,
                    _ => return Err(bad("factor_update (metropolis|gibbs)")),
                }
            }
            "burn_in" => m.burn_in = value.parse().map_err(|_| bad("burn_in"))?,
            "sampling" => m.sampling = value.parse().map_err(|_| bad("sampling"))?,
            "thinning" => m.thinning = value.parse().map_err(|_| bad("thinning"))?,
            "loadings_prior_variance" => {
                m.loadings_prior_variance =
                    value.parse().map_err(|_| bad("loadings_prior_variance"))?
            }
            "sigma2_prior_shape" => {
                m.sigma2_prior.shape = value.parse().map_err(|_| bad("sigma2_prior_shape"))?
            }
            "sigma2_prior_rate" => {
                m.sigma2_prior.rate = value.parse().map_err(|_| bad("sigma2_prior_rate"))?
            }
            "innovation_prior_shape" => {
                m.innovation_prior.shape =
                    value.parse().map_err(|_| bad("innovation_prior_shape"))?
            }
            "innovation_prior_rate" => {
                m.innovation_prior.rate = value.parse().map_err(|_| bad("innovation_prior_rate"))?
            }
            "ng_mu0" => m.normal_gamma.mu0 = value.parse().map_err(|_| bad("ng_mu0"))?,
            "ng_k0" => m.normal_gamma.k0 = value.parse().map_err(|_| bad("ng_k0"))?,
            "ng_alpha0" => m.normal_gamma.alpha0 = value.parse().map_err(|_| bad("ng_alpha0"))?,
            "ng_beta0" => m.normal_gamma.beta0 = value.parse().map_err(|_| bad("ng_beta0"))?,
            "langevin_target" => {
                m.langevin_target = value.parse().map_err(|_| bad("langevin_target"))?
            }
            "random_walk_target" => {
                m.random_walk_target = value.parse().map_err(|_| bad("random_walk_target"))?
            }
            "persistence_target" => {
                m.persistence_target = value.parse().map_err(|_| bad("persistence_target"))?
            }
            "initial_zeta" => m.initial_zeta = value.parse().map_err(|_| bad("initial_zeta"))?,
            "initial_factor_zeta" => {
                m.initial_factor_zeta = value.parse().map_err(|_| bad("initial_factor_zeta"))?
            }
            "initial_persistence_sd" => {
                m.initial_persistence_sd =
                    value.parse().map_err(|_| bad("initial_persistence_sd"))?
            }
            "store_sigma_means" => {
                m.store_sigma_means = value.parse().map_err(|_| bad("store_sigma_means"))?
            }
            "store_full_paths" => {
                m.store_full_paths = value.parse().map_err(|_| bad("store_full_paths"))?
            }
            "store_factor_draws" => {
                m.store_factor_draws = value.parse().map_err(|_| bad("store_factor_draws"))?
            }
            "forecast_horizon" => {
                self.forecast_horizon = value.parse().map_err(|_| bad("forecast_horizon"))?
            }
            "particles" => self.particles = value.parse().map_err(|_| bad("particles"))?,
            "filter" => {
                self.filter = match value {
                    "auxiliary" => FilterVariant::Auxiliary,
                    "bootstrap" => FilterVariant::Bootstrap,
                    _ => return Err(bad("filter (auxiliary|bootstrap)")),
                }
            }
            "resample_threshold" => {
                self.resample_threshold = value.parse().map_err(|_| bad("resample_threshold"))?
            }
            "emit_panels" => self.emit_panels = value.parse().map_err(|_| bad("emit_panels"))?,
            _ => return Err(CliError::Config(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Parses a flat configuration file (`key = value`, `#` comments).
    pub fn apply_file(&mut self, text: &str, path: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{path}:{}: expected key = value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| {
                CliError::Config(format!("{path}:{}: {e}", lineno + 1))
            })?;
        }
        Ok(())
    }

    /// Applies repeated `--set key=value` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), CliError> {
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override '{item}' is not key=value")))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

/// Default inverse-gamma prior, re-exported for truth files.
pub fn default_innovation_prior() -> InvGammaPrior {
    ModelConfig::basic(1).innovation_prior
}

/// Default Normal-Gamma constants.
pub fn default_normal_gamma() -> NormalGammaPrior {
    NormalGammaPrior::default()
}
