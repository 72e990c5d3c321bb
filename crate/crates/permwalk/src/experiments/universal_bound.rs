//! Universal quadratic bound on the endpoint-pair hitting time from the
//! center: exhaustive over every permutation at small n, randomized at
//! larger sizes. A violation is a hard failure carrying the offending
//! permutation. Whether the identity is the slowest permutation is an open
//! question, so the maximizer is recorded, never asserted.

use super::config::ExperimentConfig;
use super::report::{AssertionKind, ExperimentReport, SigmaRecord};
use super::{sigma_seed, SALT_UNIVERSAL};
use crate::digraph::{PermutedDigraph, VertexSet};
use crate::error::{Error, Result};
use crate::markov::{hitting_times, kernel, WalkMode};
use crate::perm::{for_each_permutation, Permutation};
use rayon::prelude::*;
use std::collections::BTreeMap;

fn endpoint_hitting_from_center(sigma: &Permutation) -> Result<f64> {
    let n = sigma.half_width();
    let half = n as i64;
    let g = PermutedDigraph::build(sigma.clone())?;
    let k = kernel(&g, WalkMode::Simple);
    let ends = VertexSet::from_vertices(n, &[-half, half])?;
    Ok(hitting_times(&k, &ends)?.value_at(0))
}

pub fn exp_universal_bound(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = ExperimentReport::new(cfg);

    for &n in &cfg.n_values {
        let bound = (4 * n * n + 6 * n + 2) as f64;
        report.push_aggregate("bound", Some(n), bound, "4n^2+6n+2", 1);

        let identity_value = endpoint_hitting_from_center(&Permutation::identity(n)?)?;
        report.push_aggregate(
            "identity_set_hitting_from_0",
            Some(n),
            identity_value,
            "exact solve",
            1,
        );
        report.push_assertion(
            &format!("identity-center-hitting-is-n-squared-n{n}"),
            AssertionKind::Hard,
            (identity_value - (n * n) as f64).abs() <= 1e-6,
            format!("E_0 = {identity_value}, expected {}", n * n),
        );

        if cfg.exhaustive {
            if n > 3 {
                return Err(Error::InvalidArgument(format!(
                    "exhaustive mode enumerates (2n+1)! permutations and requires n <= 3, got {n}"
                )));
            }
            let mut sigmas = Vec::new();
            for_each_permutation(n, |p| sigmas.push(p.clone()))?;
            let mut max_value = f64::NEG_INFINITY;
            let mut argmax: Option<&Permutation> = None;
            let mut exceeds_identity = 0usize;
            for sigma in &sigmas {
                let v = endpoint_hitting_from_center(sigma)?;
                if v > bound + 1e-9 {
                    return Err(Error::BoundViolation(format!(
                        "E_0(tau_endpoints) = {v} exceeds {bound} at n={n} for sigma {}",
                        serde_json::to_string(sigma)?
                    )));
                }
                if v > (n * n) as f64 + 1e-9 {
                    exceeds_identity += 1;
                }
                if v > max_value {
                    max_value = v;
                    argmax = Some(sigma);
                }
            }
            report.push_aggregate(
                "max_set_hitting_from_0",
                Some(n),
                max_value,
                "exact max over all permutations",
                sigmas.len(),
            );
            report.push_aggregate(
                "exceeds_identity_count",
                Some(n),
                exceeds_identity as f64,
                "count of sigma with value > n^2",
                sigmas.len(),
            );
            report.notes.push(format!(
                "n={n}: slowest of {} permutations reaches {max_value} (bound {bound}) at sigma {}; {exceeds_identity} exceed the identity's n^2",
                sigmas.len(),
                serde_json::to_string(argmax.expect("nonempty enumeration"))?
            ));
            report.push_assertion(
                &format!("universal-bound-exhaustive-n{n}"),
                AssertionKind::Hard,
                true,
                format!("all {} permutations within {bound}", sigmas.len()),
            );
        } else {
            let records: Vec<SigmaRecord> = (0..cfg.num_sigmas as u64)
                .into_par_iter()
                .map(|i| {
                    let seed = sigma_seed(cfg.master_seed, SALT_UNIVERSAL, n, i);
                    let mut rec = SigmaRecord {
                        n,
                        sigma_index: i,
                        stream_id: seed.stream_id,
                        stats: BTreeMap::new(),
                        error: None,
                    };
                    match Permutation::sample_uniform(n, seed)
                        .and_then(|s| endpoint_hitting_from_center(&s))
                    {
                        Ok(v) => {
                            rec.stats.insert("set_hitting_from_0".into(), v);
                        }
                        Err(e) => rec.error = Some(e.to_string()),
                    }
                    rec
                })
                .collect();
            let mut max_value = f64::NEG_INFINITY;
            let mut max_index = 0u64;
            for rec in &records {
                if let Some(&v) = rec.stats.get("set_hitting_from_0") {
                    if v > max_value {
                        max_value = v;
                        max_index = rec.sigma_index;
                    }
                }
            }
            if max_value > bound + 1e-9 {
                let seed = sigma_seed(cfg.master_seed, SALT_UNIVERSAL, n, max_index);
                let sigma = Permutation::sample_uniform(n, seed)?;
                return Err(Error::BoundViolation(format!(
                    "E_0(tau_endpoints) = {max_value} exceeds {bound} at n={n} for sigma {}",
                    serde_json::to_string(&sigma)?
                )));
            }
            report.push_aggregate(
                "max_set_hitting_from_0",
                Some(n),
                max_value,
                "exact max over sampled permutations",
                records.len(),
            );
            report.push_assertion(
                &format!("universal-bound-sampled-n{n}"),
                AssertionKind::Hard,
                true,
                format!("{} sampled permutations within {bound}", records.len()),
            );
            report.per_sigma.extend(records);
        }
    }
    Ok(report)
}
