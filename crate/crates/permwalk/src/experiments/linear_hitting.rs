//! Worst-case hitting times of sampled permutations, scaled by interval
//! size. For typical permutations the scaled quantile should be flat in n
//! (doubling ratio near 1); the identity control doubles instead.

use super::config::ExperimentConfig;
use super::report::{AssertionKind, ExperimentReport, SigmaRecord};
use super::{quantile, sigma_seed, sorted_values, SALT_LINEAR};
use crate::digraph::PermutedDigraph;
use crate::error::Result;
use crate::markov::{kernel, worst_case_hitting, WalkMode};
use crate::perm::Permutation;
use rayon::prelude::*;
use std::collections::BTreeMap;

pub fn exp_linear_hitting(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = ExperimentReport::new(cfg);
    let mut c_hat: BTreeMap<usize, f64> = BTreeMap::new();
    let mut identity_scaled: BTreeMap<usize, f64> = BTreeMap::new();

    for &n in &cfg.n_values {
        let id_graph = PermutedDigraph::build(Permutation::identity(n)?)?;
        let id_worst = worst_case_hitting(&kernel(&id_graph, WalkMode::Simple))?;
        let id_over_n = id_worst.value / n as f64;
        identity_scaled.insert(n, id_over_n);
        report.push_aggregate(
            "identity_worst_over_n",
            Some(n),
            id_over_n,
            "exact all-pairs solve",
            1,
        );

        let records: Vec<SigmaRecord> = (0..cfg.num_sigmas as u64)
            .into_par_iter()
            .map(|i| {
                let seed = sigma_seed(cfg.master_seed, SALT_LINEAR, n, i);
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
                    let wc = worst_case_hitting(&kernel(&g, WalkMode::Simple))?;
                    let mut stats = BTreeMap::new();
                    stats.insert("worst_case".into(), wc.value);
                    stats.insert("worst_over_n".into(), wc.value / n as f64);
                    stats.insert("argmax_start".into(), wc.start as f64);
                    stats.insert("argmax_target".into(), wc.target as f64);
                    Ok(stats)
                };
                match run() {
                    Ok(stats) => rec.stats = stats,
                    Err(e) => rec.error = Some(e.to_string()),
                }
                rec
            })
            .collect();

        let scaled = sorted_values(
            records
                .iter()
                .filter_map(|r| r.stats.get("worst_over_n").copied()),
        );
        if !scaled.is_empty() {
            let estimator = "nearest-rank quantile of worst_case/n";
            report.push_aggregate("worst_over_n_q05", Some(n), quantile(&scaled, 0.05), estimator, scaled.len());
            report.push_aggregate("worst_over_n_q50", Some(n), quantile(&scaled, 0.50), estimator, scaled.len());
            report.push_aggregate("worst_over_n_q95", Some(n), quantile(&scaled, 0.95), estimator, scaled.len());
            let c = quantile(&scaled, cfg.thresholds.quantile);
            report.push_aggregate("c_hat", Some(n), c, estimator, scaled.len());
            c_hat.insert(n, c);
        }
        let failures = records.iter().filter(|r| r.error.is_some()).count();
        if failures > 0 {
            report
                .notes
                .push(format!("{failures} solver failures at n={n}, recorded per sigma"));
        }
        report.per_sigma.extend(records);
    }

    for w in cfg.n_values.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b != 2 * a {
            continue;
        }
        if let (Some(&ca), Some(&cb)) = (c_hat.get(&a), c_hat.get(&b)) {
            let ratio = cb / ca;
            report.push_aggregate(
                "c_hat_doubling_ratio",
                Some(b),
                ratio,
                "quantile ratio across doubling",
                cfg.num_sigmas,
            );
            let lo = cfg.thresholds.ratio_band_low;
            let hi = cfg.thresholds.ratio_band_high;
            report.push_assertion(
                &format!("scaling-ratio-{a}-to-{b}"),
                AssertionKind::Statistical,
                (lo..=hi).contains(&ratio),
                format!("c_hat({b})/c_hat({a}) = {ratio:.4}, band [{lo}, {hi}]"),
            );
        }
        let (ia, ib) = (identity_scaled[&a], identity_scaled[&b]);
        let id_ratio = ib / ia;
        report.push_aggregate(
            "identity_doubling_ratio",
            Some(b),
            id_ratio,
            "exact ratio across doubling",
            1,
        );
        let lo = cfg.thresholds.identity_ratio_low;
        let hi = cfg.thresholds.identity_ratio_high;
        report.push_assertion(
            &format!("identity-quadratic-ratio-{a}-to-{b}"),
            AssertionKind::Statistical,
            (lo..=hi).contains(&id_ratio),
            format!("identity ratio = {id_ratio:.4}, band [{lo}, {hi}]"),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_produces_ratios_and_is_deterministic() {
        let cfg = ExperimentConfig {
            experiment: "linear-hitting".into(),
            n_values: vec![10, 20],
            num_sigmas: 12,
            master_seed: 31337,
            ..ExperimentConfig::default()
        };
        let a = exp_linear_hitting(&cfg).unwrap();
        let b = exp_linear_hitting(&cfg).unwrap();
        assert_eq!(a.to_json_string().unwrap(), b.to_json_string().unwrap());
        assert_eq!(a.per_sigma.len(), 24);
        assert!(a.aggregate("c_hat", Some(10)).is_some());
        assert!(a.aggregate("c_hat_doubling_ratio", Some(20)).is_some());
        // Identity control is exactly quadratic at any size.
        let id_ratio = a.aggregate("identity_doubling_ratio", Some(20)).unwrap();
        assert!((1.8..=2.2).contains(&id_ratio), "{id_ratio}");
    }
}
