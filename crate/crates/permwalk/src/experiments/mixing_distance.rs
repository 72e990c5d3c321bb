//! Mixing-time growth, typical directed distances, and the stationary
//! survival bound, all by exact distribution evolution.
//!
//! The survival scan covers every target vertex when `pairs_per_sigma`
//! reaches the interval size, and a seeded sample of targets otherwise.

use super::config::ExperimentConfig;
use super::report::{AssertionKind, ExperimentReport, SigmaRecord};
use super::{quantile, sigma_seed, sorted_values, SALT_MIXING};
use crate::digraph::PermutedDigraph;
use crate::error::Result;
use crate::markov::{kernel, survival_from_stationarity, t_mix_lazy, WalkMode};
use crate::perm::Permutation;
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

pub fn exp_mixing_and_distance(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = ExperimentReport::new(cfg);
    let mut medians: BTreeMap<usize, f64> = BTreeMap::new();

    for &n in &cfg.n_values {
        let nv = 2 * n + 1;
        let half = n as i64;
        let cap = (cfg.horizon_factor * nv as f64).ceil() as usize;
        let survival_steps = n / 3;

        let records: Vec<SigmaRecord> = (0..cfg.num_sigmas as u64)
            .into_par_iter()
            .map(|i| {
                let seed = sigma_seed(cfg.master_seed, SALT_MIXING, n, i);
                let mut rec = SigmaRecord {
                    n,
                    sigma_index: i,
                    stream_id: seed.stream_id,
                    stats: BTreeMap::new(),
                    error: None,
                };
                let run = || -> Result<BTreeMap<String, f64>> {
                    let sigma = Permutation::sample_uniform(n, seed)?;
                    let g = PermutedDigraph::build(sigma)?;
                    let lazy = kernel(&g, WalkMode::Lazy);
                    let mut stats = BTreeMap::new();

                    match t_mix_lazy(&lazy, cap)? {
                        Some(t) => {
                            stats.insert("t_mix".into(), t as f64);
                            stats.insert("t_mix_attained".into(), 1.0);
                        }
                        None => {
                            stats.insert("t_mix_attained".into(), 0.0);
                        }
                    }

                    let mut pair_rng = seed.child(1).rng();
                    let mut over = [0usize; 6];
                    for _ in 0..cfg.pairs_per_sigma {
                        let x = pair_rng.random_range(-half..=half);
                        let y = loop {
                            let y = pair_rng.random_range(-half..=half);
                            if y != x {
                                break y;
                            }
                        };
                        let d = g.distance(x, y)?;
                        for (k, slot) in over.iter_mut().enumerate() {
                            if d > k + 1 {
                                *slot += 1;
                            }
                        }
                    }
                    for (k, count) in over.iter().enumerate() {
                        stats.insert(format!("dist_gt_{}_count", k + 1), *count as f64);
                    }

                    let mut min_survival = 1.0f64;
                    if survival_steps >= 1 {
                        if cfg.pairs_per_sigma >= nv {
                            for y in -half..=half {
                                min_survival = min_survival
                                    .min(survival_from_stationarity(&lazy, y, survival_steps)?);
                            }
                            stats.insert("survival_targets".into(), nv as f64);
                        } else {
                            let mut target_rng = seed.child(2).rng();
                            let mut vertices: Vec<i64> = (-half..=half).collect();
                            for t in 0..cfg.pairs_per_sigma {
                                let j = target_rng.random_range(t..vertices.len());
                                vertices.swap(t, j);
                                min_survival = min_survival.min(survival_from_stationarity(
                                    &lazy,
                                    vertices[t],
                                    survival_steps,
                                )?);
                            }
                            stats.insert("survival_targets".into(), cfg.pairs_per_sigma as f64);
                        }
                    }
                    stats.insert("survival_min".into(), min_survival);
                    Ok(stats)
                };
                match run() {
                    Ok(stats) => rec.stats = stats,
                    Err(e) => rec.error = Some(e.to_string()),
                }
                rec
            })
            .collect();

        let tmix_values = sorted_values(
            records
                .iter()
                .filter_map(|r| r.stats.get("t_mix").copied()),
        );
        let attained: f64 = records
            .iter()
            .filter_map(|r| r.stats.get("t_mix_attained"))
            .sum();
        report.push_aggregate(
            "t_mix_attained_fraction",
            Some(n),
            attained / records.len().max(1) as f64,
            &format!("fraction mixing within cap {cap}"),
            records.len(),
        );
        if !tmix_values.is_empty() {
            let med = quantile(&tmix_values, 0.5);
            report.push_aggregate(
                "t_mix_median",
                Some(n),
                med,
                "median lazy mixing time",
                tmix_values.len(),
            );
            medians.insert(n, med);
        }

        let pair_total = records.iter().filter(|r| r.error.is_none()).count() * cfg.pairs_per_sigma;
        for k in 1..=6usize {
            let count: f64 = records
                .iter()
                .filter_map(|r| r.stats.get(&format!("dist_gt_{k}_count")))
                .sum();
            report.push_aggregate(
                &format!("dist_gt_{k}_fraction"),
                Some(n),
                count / pair_total.max(1) as f64,
                "fraction of sampled pairs at directed distance > k",
                pair_total,
            );
        }

        let survival_min = records
            .iter()
            .filter_map(|r| r.stats.get("survival_min").copied())
            .fold(1.0f64, f64::min);
        report.push_aggregate(
            "survival_min",
            Some(n),
            survival_min,
            &format!("min over targets of P_pi(tau >= {survival_steps})"),
            records.len(),
        );
        if survival_steps >= 1 {
            report.push_assertion(
                &format!("stationary-survival-half-n{n}"),
                AssertionKind::Hard,
                survival_min >= 0.5,
                format!("min survival {survival_min} vs bound 0.5 at {survival_steps} steps"),
            );
        }
        report.per_sigma.extend(records);
    }

    for (i, &a) in cfg.n_values.iter().enumerate() {
        for &b in &cfg.n_values[i + 1..] {
            if b != 4 * a {
                continue;
            }
            if let (Some(&ma), Some(&mb)) = (medians.get(&a), medians.get(&b)) {
                let ratio = mb / ma;
                report.push_aggregate(
                    "t_mix_growth_ratio",
                    Some(b),
                    ratio,
                    "median t_mix ratio across 4x size",
                    cfg.num_sigmas,
                );
                let max = cfg.thresholds.tmix_growth_max;
                report.push_assertion(
                    &format!("tmix-growth-{a}-to-{b}"),
                    AssertionKind::Statistical,
                    ratio <= max,
                    format!("median ratio {ratio:.4} vs cap {max}"),
                );
            }
        }
    }
    Ok(report)
}
