//! Seeded trajectory simulation of the simple and lazy walks.
//!
//! Each run owns one RNG stream and consumes a fixed bit budget per step
//! (a hold bit in lazy mode, then a neighbor-choice bit), so empirical
//! aggregates are reproducible bit-for-bit and independent of scheduling.

use crate::digraph::{PermutedDigraph, VertexSet};
use crate::error::{Error, Result};
use crate::markov::WalkMode;
use crate::rng::{BitSource, RngSeed};

/// Default simulation cap: far beyond any plausible hitting time for a
/// strongly connected walk digraph at desk scale.
pub fn default_step_cap(n: usize) -> usize {
    let nv = 2 * n + 1;
    100 * nv * nv
}

/// One simulated trajectory, including the starting position.
#[derive(Debug, Clone)]
pub struct WalkTrace {
    pub start: i64,
    pub mode: WalkMode,
    pub steps: Vec<i64>,
    pub seed: RngSeed,
}

/// Result of a hitting simulation; `hit_time` is `None` when the cap was
/// reached first (censoring is an outcome, not an error).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HitOutcome {
    pub hit_time: Option<usize>,
    pub steps_taken: usize,
}

/// Empirical hitting probability with its Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HitEstimate {
    pub estimate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub runs: usize,
    pub hits: usize,
}

fn check_start(g: &PermutedDigraph, start: i64) -> Result<()> {
    let half = g.half_width() as i64;
    if start < -half || start > half {
        return Err(Error::InvalidArgument(format!(
            "start {start} outside [-{0}, {0}]",
            g.half_width()
        )));
    }
    Ok(())
}

fn advance(g: &PermutedDigraph, v: i64, mode: WalkMode, bits: &mut BitSource) -> i64 {
    match mode {
        WalkMode::Simple => {
            let dir = bits.next_bit() as usize;
            g.out_neighbors(v)[dir]
        }
        WalkMode::Lazy => {
            let hold = bits.next_bit();
            let dir = bits.next_bit() as usize;
            if hold {
                v
            } else {
                g.out_neighbors(v)[dir]
            }
        }
    }
}

/// Runs the walk until it occupies `target` (time 0 counts if the start is
/// already inside) or `step_cap` steps have been taken.
pub fn simulate_hit(
    g: &PermutedDigraph,
    start: i64,
    target: &VertexSet,
    mode: WalkMode,
    seed: RngSeed,
    step_cap: usize,
) -> Result<HitOutcome> {
    check_start(g, start)?;
    if target.is_empty() {
        return Err(Error::InvalidArgument("target set is empty".into()));
    }
    if target.half_width() != g.half_width() {
        return Err(Error::InvalidArgument(
            "target half-width does not match graph".into(),
        ));
    }
    if step_cap == 0 {
        return Err(Error::InvalidArgument("step cap must be >= 1".into()));
    }
    if target.contains(start) {
        return Ok(HitOutcome {
            hit_time: Some(0),
            steps_taken: 0,
        });
    }
    let mut bits = BitSource::new(seed);
    let mut v = start;
    for t in 1..=step_cap {
        v = advance(g, v, mode, &mut bits);
        if target.contains(v) {
            return Ok(HitOutcome {
                hit_time: Some(t),
                steps_taken: t,
            });
        }
    }
    Ok(HitOutcome {
        hit_time: None,
        steps_taken: step_cap,
    })
}

/// Number of times `t in [0, horizon]` with the walk at `y`.
pub fn visit_count(
    g: &PermutedDigraph,
    start: i64,
    y: i64,
    horizon: usize,
    mode: WalkMode,
    seed: RngSeed,
) -> Result<usize> {
    check_start(g, start)?;
    check_start(g, y)?;
    let mut bits = BitSource::new(seed);
    let mut v = start;
    let mut count = usize::from(v == y);
    for _ in 0..horizon {
        v = advance(g, v, mode, &mut bits);
        if v == y {
            count += 1;
        }
    }
    Ok(count)
}

/// Fraction of `runs` independent walks that reach `y` within `horizon`
/// steps, each on its own child stream of `seed`.
pub fn hit_probability(
    g: &PermutedDigraph,
    start: i64,
    y: i64,
    horizon: usize,
    mode: WalkMode,
    seed: RngSeed,
    runs: usize,
) -> Result<HitEstimate> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be >= 1".into()));
    }
    let target = VertexSet::from_vertices(g.half_width(), &[y])?;
    let cap = horizon.max(1);
    let mut hits = 0usize;
    for run in 0..runs {
        let outcome = simulate_hit(g, start, &target, mode, seed.child(run as u64), cap)?;
        match outcome.hit_time {
            Some(t) if t <= horizon => hits += 1,
            _ => {}
        }
    }
    let p = hits as f64 / runs as f64;
    let (lo, hi) = wilson_interval(hits, runs);
    Ok(HitEstimate {
        estimate: p,
        wilson_low: lo,
        wilson_high: hi,
        runs,
        hits,
    })
}

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson_interval(hits: usize, runs: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054f64;
    let n = runs as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Materializes a full trajectory of the given length (entries include the
/// start, so the vector has `length + 1` positions).
pub fn walk_trace(
    g: &PermutedDigraph,
    start: i64,
    mode: WalkMode,
    seed: RngSeed,
    length: usize,
) -> Result<WalkTrace> {
    check_start(g, start)?;
    let mut bits = BitSource::new(seed);
    let mut steps = Vec::with_capacity(length + 1);
    let mut v = start;
    steps.push(v);
    for _ in 0..length {
        v = advance(g, v, mode, &mut bits);
        steps.push(v);
    }
    Ok(WalkTrace {
        start,
        mode,
        steps,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{self, WalkMode};
    use crate::perm::Permutation;

    fn identity_graph(n: usize) -> PermutedDigraph {
        PermutedDigraph::build(Permutation::identity(n).unwrap()).unwrap()
    }

    fn random_graph(n: usize, stream: u64) -> PermutedDigraph {
        PermutedDigraph::build(Permutation::sample_uniform(n, RngSeed::new(3131, stream)).unwrap())
            .unwrap()
    }

    #[test]
    fn start_in_target_hits_at_zero() {
        let g = identity_graph(3);
        let target = VertexSet::from_vertices(3, &[0, 2]).unwrap();
        let out = simulate_hit(&g, 2, &target, WalkMode::Simple, RngSeed::new(1, 1), 10).unwrap();
        assert_eq!(out.hit_time, Some(0));
        let seed = RngSeed::new(1, 1);
        assert!(simulate_hit(&g, 1, &target, WalkMode::Simple, seed, 0).is_err());
        assert!(simulate_hit(&g, 4, &target, WalkMode::Simple, seed, 10).is_err());
    }

    #[test]
    fn equal_seeds_equal_outcomes() {
        let g = random_graph(10, 0);
        let target = VertexSet::from_vertices(10, &[7]).unwrap();
        let a = simulate_hit(&g, -10, &target, WalkMode::Lazy, RngSeed::new(5, 9), 100_000).unwrap();
        let b = simulate_hit(&g, -10, &target, WalkMode::Lazy, RngSeed::new(5, 9), 100_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_mean_matches_exact_solve() {
        let g = identity_graph(1);
        let target = VertexSet::from_vertices(1, &[1]).unwrap();
        let runs = 100_000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for run in 0..runs {
            let t = simulate_hit(
                &g,
                -1,
                &target,
                WalkMode::Simple,
                RngSeed::new(900, run),
                default_step_cap(1),
            )
            .unwrap()
            .hit_time
            .expect("cap generous") as f64;
            sum += t;
            sumsq += t * t;
        }
        let mean = sum / runs as f64;
        let var = sumsq / runs as f64 - mean * mean;
        let se = (var / runs as f64).sqrt();
        assert!((mean - 6.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn visit_count_horizon_zero() {
        let g = identity_graph(2);
        let s = RngSeed::new(4, 4);
        assert_eq!(visit_count(&g, 1, 1, 0, WalkMode::Lazy, s).unwrap(), 1);
        assert_eq!(visit_count(&g, 1, 0, 0, WalkMode::Lazy, s).unwrap(), 0);
    }

    #[test]
    fn visit_count_mean_matches_greens_function() {
        let g = random_graph(20, 5);
        let k = markov::kernel(&g, WalkMode::Lazy);
        let horizon = 41;
        let (x, y) = (-20i64, 3i64);
        let exact = markov::greens_function(&k, x, y, horizon).unwrap();
        let runs = 100_000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for run in 0..runs {
            let z = visit_count(&g, x, y, horizon, WalkMode::Lazy, RngSeed::new(31, run)).unwrap()
                as f64;
            sum += z;
            sumsq += z * z;
        }
        let mean = sum / runs as f64;
        let var = sumsq / runs as f64 - mean * mean;
        let se = (var / runs as f64).sqrt().max(1e-9);
        assert!((mean - exact).abs() <= 3.0 * se, "mean {mean} vs {exact}");
    }

    #[test]
    fn hit_probability_basics() {
        let g = random_graph(10, 6);
        let seed = RngSeed::new(77, 0);
        let certain = hit_probability(&g, 4, 4, 5, WalkMode::Lazy, seed, 100).unwrap();
        assert_eq!(certain.estimate, 1.0);

        // Same seed stream per run makes the estimate monotone in horizon.
        let mut prev = 0.0;
        for horizon in [5usize, 10, 20, 40, 80] {
            let est = hit_probability(&g, -10, 9, horizon, WalkMode::Lazy, seed, 400).unwrap();
            assert!(est.estimate >= prev);
            assert!((0.0..=1.0).contains(&est.estimate));
            assert!(est.wilson_low <= est.estimate && est.estimate <= est.wilson_high);
            prev = est.estimate;
        }
    }

    #[test]
    fn traces_only_use_positive_probability_transitions() {
        let g = random_graph(15, 7);
        for mode in [WalkMode::Simple, WalkMode::Lazy] {
            let k = markov::kernel(&g, mode);
            for s in 0..10 {
                let trace = walk_trace(&g, 0, mode, RngSeed::new(123, s), 500).unwrap();
                assert_eq!(trace.steps.len(), 501);
                for w in trace.steps.windows(2) {
                    assert!(k.prob(w[0], w[1]) > 0.0, "{} -> {} in {mode}", w[0], w[1]);
                }
            }
        }
    }

    /// Tail of the lazy hitting time decays at least geometrically in
    /// blocks of 2n+1 steps.
    #[test]
    fn hitting_tail_decays_geometrically() {
        let n = 50usize;
        let g = random_graph(n, 8);
        let nv = 2 * n + 1;
        let target = VertexSet::from_vertices(n, &[17]).unwrap();
        let runs = 2000u64;
        let mut survivors = [0usize; 7];
        for run in 0..runs {
            let t = simulate_hit(
                &g,
                -(n as i64),
                &target,
                WalkMode::Lazy,
                RngSeed::new(606, run),
                7 * nv,
            )
            .unwrap();
            let reached = t.hit_time.unwrap_or(usize::MAX);
            for (j, slot) in survivors.iter_mut().enumerate() {
                if reached > j * nv {
                    *slot += 1;
                }
            }
        }
        let mut ratios = Vec::new();
        for j in 1..survivors.len() {
            if survivors[j - 1] > 0 {
                ratios.push(survivors[j] as f64 / survivors[j - 1] as f64);
            }
        }
        let fitted = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!(fitted < 1.0, "fitted decay rate {fitted}");
    }
}
