//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Exact identities and proven bounds are asserted tightly;
//! asymptotic claims are rendered as finite-sample statistical checks with
//! pinned thresholds.

use permwalk::digraph::{self, boundary, PermutedDigraph, VertexSet};
use permwalk::expansion::{self, comp12_check, union_bound_sum, UnionBoundForm};
use permwalk::experiments::{
    exp_linear_hitting, exp_lower_bound, exp_mixing_and_distance, exp_universal_bound,
    ExperimentConfig,
};
use permwalk::markov::{self, kernel, WalkMode};
use permwalk::montecarlo;
use permwalk::perm::{for_each_permutation, Permutation};
use permwalk::rng::RngSeed;
use rand::Rng;

fn report(id: u32, name: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("acceptance criterion {id:02} ({name}): PASS");
    } else {
        println!(
            "acceptance criterion {id:02} ({name}): FAIL — {}",
            failures.join("; ")
        );
    }
    assert!(failures.is_empty(), "criterion {id:02} failed: {failures:?}");
}

fn check(failures: &mut Vec<String>, cond: bool, msg: impl FnOnce() -> String) {
    if !cond {
        failures.push(msg());
    }
}

fn endpoints(n: usize) -> VertexSet {
    VertexSet::from_vertices(n, &[-(n as i64), n as i64]).unwrap()
}

fn random_sigma(n: usize, master: u64, stream: u64) -> Permutation {
    Permutation::sample_uniform(n, RngSeed::new(master, stream)).unwrap()
}

fn subset_from_mask(n: usize, mask: u64) -> VertexSet {
    let mut s = VertexSet::empty(n);
    for idx in 0..(2 * n + 1) {
        if mask & (1 << idx) != 0 {
            s.insert(idx as i64 - n as i64).unwrap();
        }
    }
    s
}

/// Criterion 1: exact identity hitting of the endpoint pair from the
/// center, E = n^2 for n up to 50, within 1e-6.
#[test]
fn c01_identity_center_hitting_is_n_squared() {
    let mut failures = Vec::new();
    for n in 1..=50usize {
        let g = PermutedDigraph::build(Permutation::identity(n).unwrap()).unwrap();
        let k = kernel(&g, WalkMode::Simple);
        let table = markov::hitting_times(&k, &endpoints(n)).unwrap();
        let got = table.value_at(0);
        let want = (n * n) as f64;
        check(&mut failures, (got - want).abs() <= 1e-6, || {
            format!("n={n}: E_0 = {got}, expected {want}")
        });
    }
    report(1, "identity center hitting = n^2, n <= 50", &failures);
}

/// Criterion 2: universal quadratic bound, exhaustive at n in {1,2,3} and
/// over 1000 random permutations at n = 50.
#[test]
fn c02_universal_quadratic_bound() {
    let mut failures = Vec::new();
    let exhaustive = ExperimentConfig {
        experiment: "universal-bound".into(),
        n_values: vec![1, 2, 3],
        exhaustive: true,
        master_seed: 2,
        ..ExperimentConfig::default()
    };
    match exp_universal_bound(&exhaustive) {
        Ok(rep) => {
            check(&mut failures, rep.all_assertions_passed(), || {
                "exhaustive report has failed assertions".into()
            });
            for n in [1usize, 2, 3] {
                let max = rep.aggregate("max_set_hitting_from_0", Some(n)).unwrap();
                let bound = (4 * n * n + 6 * n + 2) as f64;
                check(&mut failures, max <= bound + 1e-9, || {
                    format!("n={n}: max {max} above {bound}")
                });
            }
        }
        Err(e) => failures.push(format!("exhaustive run failed: {e}")),
    }
    let sampled = ExperimentConfig {
        experiment: "universal-bound".into(),
        n_values: vec![50],
        num_sigmas: 1000,
        master_seed: 2,
        ..ExperimentConfig::default()
    };
    match exp_universal_bound(&sampled) {
        Ok(rep) => check(&mut failures, rep.all_assertions_passed(), || {
            "sampled report has failed assertions".into()
        }),
        Err(e) => failures.push(format!("sampled run failed: {e}")),
    }
    report(2, "universal bound 4n^2+6n+2", &failures);
}

/// Criterion 3: every permutation at n in {1,2,3} yields a strongly
/// connected walk digraph (verified at construction).
#[test]
fn c03_strong_connectivity_exhaustive() {
    let mut failures = Vec::new();
    let mut counts = Vec::new();
    for n in [1usize, 2, 3] {
        let mut count = 0usize;
        for_each_permutation(n, |p| {
            if PermutedDigraph::build(p.clone()).is_err() {
                failures.push(format!("n={n}: sigma {:?} not strongly connected", p.image()));
            }
            count += 1;
        })
        .unwrap();
        counts.push(count);
    }
    check(&mut failures, counts == vec![6, 120, 5040], || {
        format!("enumeration counts were {counts:?}")
    });
    report(3, "strong connectivity for all sigma, n <= 3", &failures);
}

/// Criterion 4: boundary sandwich and square-graph boundary comparison,
/// exhaustive at n <= 2 plus 10^4 random pairs at n = 50; interval growth
/// inequality over every subset at n <= 6.
#[test]
fn c04_boundary_and_growth_inequalities() {
    let mut failures = Vec::new();

    for n in [1usize, 2] {
        let bits = 2 * n + 1;
        for_each_permutation(n, |p| {
            let g = PermutedDigraph::build(p.clone()).unwrap();
            for mask in 0u64..(1 << bits) {
                let a = subset_from_mask(n, mask);
                if !a.is_empty() && !a.is_full() {
                    let w = expansion::phi(&a, &g).unwrap();
                    let b = boundary(&a, &g).unwrap().len() as f64;
                    let size = a.len() as f64;
                    if !(b / (2.0 * size) <= w.phi + 1e-12 && w.phi <= b / size + 1e-12) {
                        failures.push(format!("sandwich fails at n={n} A={:?}", a.to_vec()));
                    }
                }
                if !comp12_check(&a, &g).unwrap() {
                    failures.push(format!("square boundary bound fails at n={n} A={:?}", a.to_vec()));
                }
            }
        })
        .unwrap();
    }

    let n = 50usize;
    let mut rng = RngSeed::new(4, 0).rng();
    for trial in 0..100u32 {
        let sigma = random_sigma(n, 4, trial as u64 + 1);
        let g = PermutedDigraph::build(sigma).unwrap();
        for _ in 0..100 {
            let mut a = VertexSet::empty(n);
            for v in -(n as i64)..=n as i64 {
                if rng.random::<bool>() {
                    a.insert(v).unwrap();
                }
            }
            if !a.is_empty() && !a.is_full() {
                let w = expansion::phi(&a, &g).unwrap();
                let b = boundary(&a, &g).unwrap().len() as f64;
                let size = a.len() as f64;
                if !(b / (2.0 * size) <= w.phi + 1e-12 && w.phi <= b / size + 1e-12) {
                    failures.push(format!("sandwich fails on random pair, trial {trial}"));
                }
            }
            if !comp12_check(&a, &g).unwrap() {
                failures.push(format!("square boundary bound fails on random pair, trial {trial}"));
            }
        }
    }

    for n in 1..=6usize {
        let bits = 2 * n + 1;
        for mask in 0u64..(1 << bits) {
            let a = subset_from_mask(n, mask);
            if a.len() > n {
                continue;
            }
            let (k_even, k_odd) = digraph::component_counts(&a);
            let grown = digraph::plus_minus_one(&a).len() as i64;
            if grown < a.len() as i64 + k_even as i64 + k_odd as i64 - 4 {
                failures.push(format!("growth inequality fails at n={n} A={:?}", a.to_vec()));
            }
        }
    }
    report(4, "boundary sandwich, square comparison, interval growth", &failures);
}

/// Criterion 5: exact hitting tables satisfy simple = lazy / 2 elementwise
/// for 20 random permutations at n = 20, within 1e-8.
#[test]
fn c05_lazy_simple_factor_two() {
    let mut failures = Vec::new();
    let n = 20usize;
    for s in 0..20u64 {
        let g = PermutedDigraph::build(random_sigma(n, 5, s)).unwrap();
        let simple = markov::all_pairs_hitting(&kernel(&g, WalkMode::Simple)).unwrap();
        let lazy = markov::all_pairs_hitting(&kernel(&g, WalkMode::Lazy)).unwrap();
        let mut worst = 0.0f64;
        for x in -(n as i64)..=n as i64 {
            for y in -(n as i64)..=n as i64 {
                worst = worst.max((simple.value(x, y) - lazy.value(x, y) / 2.0).abs());
            }
        }
        check(&mut failures, worst <= 1e-8, || {
            format!("sigma {s}: max |simple - lazy/2| = {worst:.3e}")
        });
    }
    report(5, "lazy hitting times are exactly twice simple", &failures);
}

/// Criterion 6: over 200 sampled permutations at each n in
/// {100, 200, 400}, the 95th percentile of E/n has doubling ratio within
/// [0.7, 1.4], while the identity control doubles (quadratic growth).
#[test]
fn c06_linear_worst_case_scaling() {
    let mut failures = Vec::new();
    let cfg = ExperimentConfig {
        experiment: "linear-hitting".into(),
        n_values: vec![100, 200, 400],
        num_sigmas: 200,
        master_seed: 6,
        ..ExperimentConfig::default()
    };
    let rep = exp_linear_hitting(&cfg).unwrap();
    for name in [
        "scaling-ratio-100-to-200",
        "scaling-ratio-200-to-400",
        "identity-quadratic-ratio-100-to-200",
        "identity-quadratic-ratio-200-to-400",
    ] {
        match rep.assertion(name) {
            Some(a) => check(&mut failures, a.passed, || format!("{name}: {}", a.detail)),
            None => failures.push(format!("missing assertion {name}")),
        }
    }
    let errors = rep.per_sigma.iter().filter(|r| r.error.is_some()).count();
    check(&mut failures, errors == 0, || {
        format!("{errors} per-sigma solver failures")
    });
    report(6, "linear scaling of typical worst-case hitting", &failures);
}

/// Criterion 7: at n = 200 with 200 permutations and 50 pairs each, at
/// least 95% of sampled (sigma, x, y) have exact hitting time >= n/18, and
/// likewise for the endpoint-set variant from interior starts.
#[test]
fn c07_typical_lower_bound() {
    let mut failures = Vec::new();
    let cfg = ExperimentConfig {
        experiment: "lower-bound".into(),
        n_values: vec![200],
        num_sigmas: 200,
        pairs_per_sigma: 50,
        master_seed: 7,
        ..ExperimentConfig::default()
    };
    let rep = exp_lower_bound(&cfg).unwrap();
    for name in ["pair-lower-bound-n200", "set-lower-bound-n200"] {
        match rep.assertion(name) {
            Some(a) => check(&mut failures, a.passed, || format!("{name}: {}", a.detail)),
            None => failures.push(format!("missing assertion {name}")),
        }
    }
    if let Some(a) = rep.assertion("fixed-point-pair-exact-n200") {
        check(&mut failures, a.passed, || {
            format!("fixed-point channel: {}", a.detail)
        });
    }
    report(7, "typical lower bound n/18", &failures);
}

/// Criterion 8: the law of shift fixed points over 10^4 permutations at
/// n = 500 is within 0.02 total variation of Poisson(1) on {0..8}.
#[test]
fn c08_poisson_shift_fixed_points() {
    let mut failures = Vec::new();
    let draws = 10_000u64;
    let mut counts = [0usize; 9];
    let mut kept = 0usize;
    for i in 0..draws {
        let k = random_sigma(500, 8, i).shift_fixed_points();
        if k <= 8 {
            counts[k] += 1;
            kept += 1;
        }
    }
    let mut poisson = [0f64; 9];
    let mut fact = 1.0;
    for (k, slot) in poisson.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *slot = (-1.0f64).exp() / fact;
    }
    let mass: f64 = poisson.iter().sum();
    let tv: f64 = counts
        .iter()
        .zip(poisson.iter())
        .map(|(&c, &q)| (c as f64 / kept as f64 - q / mass).abs())
        .sum::<f64>()
        / 2.0;
    check(&mut failures, tv <= 0.02, || format!("tv distance {tv:.4}"));
    report(8, "Poisson(1) law of shift fixed points", &failures);
}

/// Criterion 9: stationary-start survival P(tau >= n/3) >= 1/2 for every
/// target, 20 permutations at n = 60, by exact absorbing evolution.
#[test]
fn c09_stationary_survival_bound() {
    let mut failures = Vec::new();
    let cfg = ExperimentConfig {
        experiment: "mixing-distance".into(),
        n_values: vec![60],
        num_sigmas: 20,
        // Covers all 121 targets exactly.
        pairs_per_sigma: 121,
        master_seed: 9,
        ..ExperimentConfig::default()
    };
    let rep = exp_mixing_and_distance(&cfg).unwrap();
    match rep.assertion("stationary-survival-half-n60") {
        Some(a) => check(&mut failures, a.passed, || a.detail.clone()),
        None => failures.push("missing survival assertion".into()),
    }
    let covered = rep
        .per_sigma
        .iter()
        .all(|r| r.stats.get("survival_targets") == Some(&121.0));
    check(&mut failures, covered, || {
        "survival scan did not cover all targets".into()
    });
    report(9, "stationary survival >= 1/2 at n/3 steps", &failures);
}

/// Criterion 10: median lazy mixing time grows sublinearly: the ratio
/// across n = 100 -> 400 stays at or below 2.0 over 50 permutations.
#[test]
fn c10_mixing_time_growth() {
    let mut failures = Vec::new();
    let cfg = ExperimentConfig {
        experiment: "mixing-distance".into(),
        n_values: vec![100, 400],
        num_sigmas: 50,
        pairs_per_sigma: 10,
        master_seed: 10,
        ..ExperimentConfig::default()
    };
    let rep = exp_mixing_and_distance(&cfg).unwrap();
    for n in [100usize, 400] {
        let attained = rep.aggregate("t_mix_attained_fraction", Some(n)).unwrap();
        check(&mut failures, attained == 1.0, || {
            format!("n={n}: only {attained} of runs mixed within the cap")
        });
    }
    match rep.assertion("tmix-growth-100-to-400") {
        Some(a) => check(&mut failures, a.passed, || a.detail.clone()),
        None => failures.push("missing growth assertion".into()),
    }
    report(10, "lazy mixing-time growth ratio <= 2.0", &failures);
}

/// Criterion 11: Monte Carlo cross-validation against the exact solvers:
/// empirical mean hitting times within 4 standard errors (10 sigmas at
/// n=20, 10 pairs, 10^4 runs each); visit-count mean and second moment
/// within 3 standard errors of the exact oracles.
#[test]
fn c11_monte_carlo_cross_validation() {
    let mut failures = Vec::new();
    let n = 20usize;
    let half = n as i64;
    let runs = 10_000u64;

    for s in 0..10u64 {
        let sigma = random_sigma(n, 11, s);
        let g = PermutedDigraph::build(sigma).unwrap();
        let k = kernel(&g, WalkMode::Simple);
        let exact = markov::all_pairs_hitting(&k).unwrap();
        let mut pair_rng = RngSeed::new(11, 1000 + s).rng();
        for p in 0..10u64 {
            let x = pair_rng.random_range(-half..=half);
            let y = loop {
                let y = pair_rng.random_range(-half..=half);
                if y != x {
                    break y;
                }
            };
            let target = VertexSet::from_vertices(n, &[y]).unwrap();
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for run in 0..runs {
                let seed = RngSeed::new(11, 0).child(s).child(p).child(run);
                let t = montecarlo::simulate_hit(
                    &g,
                    x,
                    &target,
                    WalkMode::Simple,
                    seed,
                    montecarlo::default_step_cap(n),
                )
                .unwrap()
                .hit_time
                .expect("cap is generous") as f64;
                sum += t;
                sumsq += t * t;
            }
            let mean = sum / runs as f64;
            let var = (sumsq / runs as f64 - mean * mean).max(0.0);
            let se = (var / runs as f64).sqrt().max(1e-12);
            let want = exact.value(x, y);
            check(&mut failures, (mean - want).abs() <= 4.0 * se, || {
                format!("sigma {s} pair ({x},{y}): mean {mean:.3} vs exact {want:.3}, se {se:.3}")
            });
        }
    }

    // Visit-count mean and second moment against the exact oracles.
    let g = PermutedDigraph::build(random_sigma(n, 11, 999)).unwrap();
    let k = kernel(&g, WalkMode::Lazy);
    let horizon = 2 * n + 1;
    for (pair_idx, (x, y)) in [(-half, 3i64), (0, 0), (5, -17)].into_iter().enumerate() {
        let exact_mean = markov::greens_function(&k, x, y, horizon).unwrap();
        let exact_second = markov::visit_second_moment(&k, x, y, horizon).unwrap();
        let runs = 100_000u64;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        let mut sum4 = 0.0;
        for run in 0..runs {
            let seed = RngSeed::new(1111, run).child(pair_idx as u64);
            let z = montecarlo::visit_count(&g, x, y, horizon, WalkMode::Lazy, seed).unwrap() as f64;
            sum += z;
            sum2 += z * z;
            sum4 += z * z * z * z;
        }
        let mean = sum / runs as f64;
        let mean2 = sum2 / runs as f64;
        let se_mean = ((mean2 - mean * mean).max(0.0) / runs as f64).sqrt().max(1e-12);
        check(&mut failures, (mean - exact_mean).abs() <= 3.0 * se_mean, || {
            format!("visit mean at ({x},{y}): {mean:.4} vs {exact_mean:.4}")
        });
        let mean4 = sum4 / runs as f64;
        let se_second = ((mean4 - mean2 * mean2).max(0.0) / runs as f64).sqrt().max(1e-12);
        check(
            &mut failures,
            (mean2 - exact_second).abs() <= 3.0 * se_second,
            || format!("visit second moment at ({x},{y}): {mean2:.4} vs {exact_second:.4}"),
        );
    }
    report(11, "Monte Carlo agrees with exact solvers", &failures);
}

/// Criterion 12: the union-bound sum at eps = 0.005 strictly decreases
/// over n in {10^3, 10^4, 10^5}.
#[test]
fn c12_union_bound_sum_decreasing() {
    let mut failures = Vec::new();
    let values: Vec<f64> = [1_000usize, 10_000, 100_000]
        .iter()
        .map(|&n| union_bound_sum(n, 0.005, UnionBoundForm::FourthPower).unwrap())
        .collect();
    check(
        &mut failures,
        values.windows(2).all(|w| w[1] < w[0]),
        || format!("ln values not strictly decreasing: {values:?}"),
    );
    check(&mut failures, values.iter().all(|v| v.is_finite()), || {
        format!("non-finite values: {values:?}")
    });
    report(12, "union-bound sum strictly decreasing", &failures);
}

/// Criterion 13: experiment reports are byte-identical across reruns and
/// across thread counts.
#[test]
fn c13_report_reproducibility() {
    let mut failures = Vec::new();
    let cfg = ExperimentConfig {
        experiment: "linear-hitting".into(),
        n_values: vec![10, 20],
        num_sigmas: 6,
        master_seed: 13,
        ..ExperimentConfig::default()
    };
    let baseline = exp_linear_hitting(&cfg).unwrap();
    let rerun = exp_linear_hitting(&cfg).unwrap();
    check(
        &mut failures,
        baseline.to_json_string().unwrap() == rerun.to_json_string().unwrap(),
        || "rerun JSON differs".into(),
    );
    for jobs in [1usize, 2] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .unwrap();
        let rep = pool.install(|| exp_linear_hitting(&cfg)).unwrap();
        check(
            &mut failures,
            rep.to_json_string().unwrap() == baseline.to_json_string().unwrap()
                && rep.to_sigma_csv() == baseline.to_sigma_csv()
                && rep.to_aggregate_csv() == baseline.to_aggregate_csv(),
            || format!("jobs={jobs} output differs"),
        );
    }
    report(13, "byte-identical reports across reruns and jobs", &failures);
}
