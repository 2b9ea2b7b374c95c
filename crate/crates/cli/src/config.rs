//! Run configuration: an optional JSON file, overridden field by field by flags.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Every knob any verb reads. Absent fields fall back to per-verb defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: Option<String>,
    pub model: Option<String>,
    pub algebra: Option<String>,
    pub param: Option<f64>,
    pub metric: Option<Vec<f64>>,
    pub kappa: Option<f64>,
    pub mu: Option<f64>,
    pub f: Option<f64>,
    pub scalar: Option<f64>,
    pub sigma0: Option<f64>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub stride: Option<usize>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub hh: Option<String>,
    pub kappa_min: Option<f64>,
    pub kappa_max: Option<f64>,
    pub kappa_n: Option<usize>,
    pub mu_min: Option<f64>,
    pub mu_max: Option<f64>,
    pub mu_n: Option<usize>,
    pub cross_check: Option<bool>,
    pub suite: Option<String>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn cfg_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| cfg_err(format!("malformed config {}: {e}", path.display())))
    }

    /// Fields set in `top` win.
    pub fn overlay(mut self, top: RunConfig) -> RunConfig {
        overlay!(self, top; case, model, algebra, param, metric, kappa, mu, f, scalar, sigma0, t_start, t_end, stride,
            rtol, atol, hh, kappa_min, kappa_max, kappa_n, mu_min, mu_max, mu_n, cross_check, suite, trials, seed, out);
        self
    }

    /// Rejects non-finite numbers and inverted grid bounds.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let reals = [
            ("param", self.param),
            ("kappa", self.kappa),
            ("mu", self.mu),
            ("f", self.f),
            ("scalar", self.scalar),
            ("sigma0", self.sigma0),
            ("t-start", self.t_start),
            ("t-end", self.t_end),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("kappa-min", self.kappa_min),
            ("kappa-max", self.kappa_max),
            ("mu-min", self.mu_min),
            ("mu-max", self.mu_max),
        ];
        for (name, v) in reals {
            if v.is_some_and(|x| !x.is_finite()) {
                return Err(cfg_err(format!("--{name} must be finite")));
            }
        }
        if self.metric.as_ref().is_some_and(|m| m.iter().any(|x| !x.is_finite())) {
            return Err(cfg_err("--metric entries must be finite"));
        }
        for (name, lo, hi) in [("kappa", self.kappa_min, self.kappa_max), ("mu", self.mu_min, self.mu_max)] {
            if let (Some(a), Some(b)) = (lo, hi) {
                if a > b {
                    return Err(cfg_err(format!("--{name}-min exceeds --{name}-max")));
                }
            }
        }
        if self.stride == Some(0) {
            return Err(cfg_err("--stride must be positive"));
        }
        for (name, v) in [("rtol", self.rtol), ("atol", self.atol)] {
            if v.is_some_and(|x| x <= 0.0) {
                return Err(cfg_err(format!("--{name} must be positive")));
            }
        }
        Ok(())
    }
}
