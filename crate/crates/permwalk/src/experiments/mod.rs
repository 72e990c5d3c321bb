//! Experiment harness: reproducible statistical runs over sampled
//! permutations, each emitting a structured report.
//!
//! Work fans out over permutation indices; every index derives its own RNG
//! stream from the master seed, and aggregation happens in index order, so
//! reports are byte-identical across reruns and thread counts.

pub mod cli;
pub mod config;
pub mod report;

mod expansion_probe;
mod linear_hitting;
mod lower_bound;
mod mixing_distance;
mod universal_bound;

pub use cli::cli_main;
pub use config::{ExperimentConfig, Thresholds, EXPERIMENT_NAMES};
pub use expansion_probe::exp_expansion;
pub use linear_hitting::exp_linear_hitting;
pub use lower_bound::exp_lower_bound;
pub use mixing_distance::exp_mixing_and_distance;
pub use report::{AggregateStat, AssertionKind, AssertionRecord, ExperimentReport, SigmaRecord};
pub use universal_bound::exp_universal_bound;

use crate::error::Result;
use crate::rng::RngSeed;

/// Dispatches on `config.experiment`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    match config.experiment.as_str() {
        "linear-hitting" => exp_linear_hitting(config),
        "lower-bound" => exp_lower_bound(config),
        "universal-bound" => exp_universal_bound(config),
        "expansion" => exp_expansion(config),
        "mixing-distance" => exp_mixing_and_distance(config),
        other => Err(crate::error::Error::InvalidArgument(format!(
            "unknown experiment {other:?}"
        ))),
    }
}

// Stream salts keep different experiments off each other's permutations
// even under one master seed.
pub(crate) const SALT_LINEAR: u64 = 1;
pub(crate) const SALT_LOWER: u64 = 2;
pub(crate) const SALT_UNIVERSAL: u64 = 3;
pub(crate) const SALT_EXPANSION: u64 = 4;
pub(crate) const SALT_MIXING: u64 = 5;

/// The stream that produces permutation `index` at size `n`.
pub(crate) fn sigma_seed(master_seed: u64, salt: u64, n: usize, index: u64) -> RngSeed {
    RngSeed::new(master_seed, 0)
        .child(salt)
        .child(n as u64)
        .child(index)
}

/// Values sorted for quantile extraction; NaNs sort last and never appear
/// in practice.
pub(crate) fn sorted_values(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Nearest-rank quantile of a sorted sample.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}
