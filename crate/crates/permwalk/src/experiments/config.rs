//! Experiment configuration: a JSON-loadable description that fully
//! determines an experiment run, including every statistical threshold.
//!
//! Thresholds are defaults of the artifact, not constants of nature: they
//! render "with high probability" claims as finite-sample acceptance bands
//! and can be tuned per run.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const EXPERIMENT_NAMES: [&str; 5] = [
    "linear-hitting",
    "lower-bound",
    "universal-bound",
    "expansion",
    "mixing-distance",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n_values: Vec<usize>,
    pub num_sigmas: usize,
    pub master_seed: u64,
    /// Ordered (start, target) pairs sampled per permutation where the
    /// experiment samples pairs; also caps how many target vertices the
    /// survival scan visits (all of them when it covers the interval).
    pub pairs_per_sigma: usize,
    /// Scales interval length into step horizons (mixing-time caps).
    pub horizon_factor: f64,
    /// Component-density parameter of the union-bound sums.
    pub eps: f64,
    pub thresholds: Thresholds,
    /// Enumerate every permutation instead of sampling (universal-bound
    /// only; requires n <= 3).
    pub exhaustive: bool,
    /// Random restarts for the heuristic bottleneck search.
    pub search_budget: usize,
    /// Echoed output destination; the writer decides actual paths.
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            n_values: Vec::new(),
            num_sigmas: 1,
            master_seed: 0,
            pairs_per_sigma: 50,
            horizon_factor: 1.0,
            eps: 0.005,
            thresholds: Thresholds::default(),
            exhaustive: false,
            search_budget: 8,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Minimum fraction of samples that must clear a statistical bound.
    pub pass_fraction: f64,
    /// Acceptance band for the doubling ratio of the scaled worst-case
    /// hitting quantile (linear scaling has ratio near 1).
    pub ratio_band_low: f64,
    pub ratio_band_high: f64,
    /// Band for the identity control's doubling ratio (quadratic scaling
    /// has ratio near 2).
    pub identity_ratio_low: f64,
    pub identity_ratio_high: f64,
    /// Cap on median mixing-time growth across a 4x size increase.
    pub tmix_growth_max: f64,
    /// Which upper quantile of the scaled worst case is tracked.
    pub quantile: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            pass_fraction: 0.95,
            ratio_band_low: 0.7,
            ratio_band_high: 1.4,
            identity_ratio_low: 1.8,
            identity_ratio_high: 2.2,
            tmix_growth_max: 2.0,
            quantile: 0.95,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENT_NAMES.contains(&self.experiment.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "unknown experiment {:?}; expected one of {:?}",
                self.experiment, EXPERIMENT_NAMES
            )));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidArgument("n_values must be nonempty".into()));
        }
        if self.n_values.contains(&0) {
            return Err(Error::InvalidArgument("n_values must be positive".into()));
        }
        if !self.n_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "n_values must be strictly increasing".into(),
            ));
        }
        if self.num_sigmas == 0 || self.pairs_per_sigma == 0 || self.search_budget == 0 {
            return Err(Error::InvalidArgument(
                "num_sigmas, pairs_per_sigma, and search_budget must be >= 1".into(),
            ));
        }
        if !(self.horizon_factor > 0.0 && self.horizon_factor.is_finite()) {
            return Err(Error::InvalidArgument(
                "horizon_factor must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_with_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment": "linear-hitting", "n_values": [10, 20], "num_sigmas": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.num_sigmas, 3);
        assert_eq!(cfg.thresholds.pass_fraction, 0.95);
        assert_eq!(cfg.eps, 0.005);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        assert!(ExperimentConfig::from_json(r#"{"experiment": "nope", "n_values": [1]}"#).is_err());
        assert!(
            ExperimentConfig::from_json(r#"{"experiment": "expansion", "n_values": []}"#).is_err()
        );
        assert!(ExperimentConfig::from_json(
            r#"{"experiment": "expansion", "n_values": [5, 5]}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"experiment": "expansion", "n_values": [8], "num_sigmas": 0}"#
        )
        .is_err());
    }
}
