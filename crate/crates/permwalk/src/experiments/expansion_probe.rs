//! Distribution of the bottleneck ratio over sampled permutations: exact
//! by subset enumeration up to the exhaustive size limit, upper-bound
//! witnesses from the heuristic search above it, with the identity's
//! vanishing ratio as the contrast and the union-bound sums as the
//! numerical side of the expansion argument.

use super::config::ExperimentConfig;
use super::report::{AssertionKind, ExperimentReport, SigmaRecord};
use super::{quantile, sigma_seed, sorted_values, SALT_EXPANSION};
use crate::digraph::PermutedDigraph;
use crate::error::Result;
use crate::expansion::{
    phi_star_exact, phi_star_search, union_bound_sum, UnionBoundForm, N_MAX_EXACT,
};
use crate::perm::Permutation;
use rayon::prelude::*;
use std::collections::BTreeMap;

const UNION_BOUND_TRACE: [usize; 3] = [1_000, 10_000, 100_000];

pub fn exp_expansion(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = ExperimentReport::new(cfg);

    for &n in &cfg.n_values {
        let exact = n <= N_MAX_EXACT;
        let method = if exact { "exact enumeration" } else { "search upper bound" };
        let stat_key = if exact { "phi_star" } else { "phi_star_upper" };

        let id_graph = PermutedDigraph::build(Permutation::identity(n)?)?;
        let id_phi = if exact {
            phi_star_exact(&id_graph)?.phi
        } else {
            let seed = sigma_seed(cfg.master_seed, SALT_EXPANSION, n, u64::MAX);
            phi_star_search(&id_graph, seed, cfg.search_budget)?.phi
        };
        report.push_aggregate("identity_phi_star", Some(n), id_phi, method, 1);

        let records: Vec<SigmaRecord> = (0..cfg.num_sigmas as u64)
            .into_par_iter()
            .map(|i| {
                let seed = sigma_seed(cfg.master_seed, SALT_EXPANSION, n, i);
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
                    let witness = if exact {
                        phi_star_exact(&g)?
                    } else {
                        phi_star_search(&g, seed.child(1), cfg.search_budget)?
                    };
                    let mut stats = BTreeMap::new();
                    stats.insert(stat_key.into(), witness.phi);
                    stats.insert("witness_edges_out".into(), witness.edges_out as f64);
                    stats.insert("witness_size".into(), witness.set.len() as f64);
                    Ok(stats)
                };
                match run() {
                    Ok(stats) => rec.stats = stats,
                    Err(e) => rec.error = Some(e.to_string()),
                }
                rec
            })
            .collect();

        let values = sorted_values(
            records
                .iter()
                .filter_map(|r| r.stats.get(stat_key).copied()),
        );
        if !values.is_empty() {
            let estimator = format!("nearest-rank quantile over {method}");
            let delta_hat = quantile(&values, 0.05);
            report.push_aggregate(
                &format!("{stat_key}_q05"),
                Some(n),
                delta_hat,
                &estimator,
                values.len(),
            );
            report.push_aggregate(
                &format!("{stat_key}_q50"),
                Some(n),
                quantile(&values, 0.5),
                &estimator,
                values.len(),
            );
            report.push_aggregate(&format!("{stat_key}_min"), Some(n), values[0], &estimator, values.len());
            if exact {
                report.push_assertion(
                    &format!("delta-hat-positive-n{n}"),
                    AssertionKind::Statistical,
                    delta_hat > 0.0,
                    format!("5th percentile of exact phi_star = {delta_hat}"),
                );
                report.push_assertion(
                    &format!("delta-hat-exceeds-identity-n{n}"),
                    AssertionKind::Statistical,
                    delta_hat > id_phi,
                    format!("delta_hat = {delta_hat} vs identity {id_phi}"),
                );
            }
        }
        report.per_sigma.extend(records);
    }

    let mut trace = Vec::new();
    for &tn in &UNION_BOUND_TRACE {
        let ln = union_bound_sum(tn, cfg.eps, UnionBoundForm::FourthPower)?;
        report.push_aggregate(
            "union_bound_ln",
            Some(tn),
            ln,
            "log-gamma evaluation of the fourth-power sum",
            1,
        );
        trace.push(ln);
    }
    let decreasing = trace.windows(2).all(|w| w[1] < w[0]);
    report.push_assertion(
        "union-bound-strictly-decreasing",
        AssertionKind::Hard,
        decreasing,
        format!("ln values over n={UNION_BOUND_TRACE:?}: {trace:?} at eps={}", cfg.eps),
    );
    Ok(report)
}
