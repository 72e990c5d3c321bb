//! Bottleneck ratios, exhaustive and heuristic conductance search, and the
//! binomial counting bounds behind the expansion argument.
//!
//! For the simple walk on a d-regular Eulerian digraph with uniform
//! stationary measure, the bottleneck ratio of a nonempty proper subset `S`
//! is `edges_out(S) / (d * |S|)`, and the chain constant is the minimum over
//! all `S` with at most half the stationary mass, i.e. `|S| <= n` on the
//! interval of `2n + 1` points.

use crate::digraph::{self, Digraph, PermutedDigraph, VertexSet};
use crate::error::{Error, Result};
use crate::rng::RngSeed;
use serde::{Deserialize, Serialize};

/// Largest half-width for which `phi_star_exact` enumerates all subsets
/// (2^23 at n = 11; seconds of work with incremental cut maintenance).
pub const N_MAX_EXACT: usize = 11;

/// A subset together with its bottleneck ratio data.
#[derive(Debug, Clone)]
pub struct BottleneckWitness {
    pub set: VertexSet,
    pub phi: f64,
    pub edges_out: usize,
    pub pi_s: f64,
}

impl BottleneckWitness {
    fn from_cut<G: Digraph>(g: &G, set: VertexSet, cut: usize) -> BottleneckWitness {
        let phi = cut as f64 / (g.out_degree() * set.len()) as f64;
        let pi_s = set.len() as f64 / g.num_vertices() as f64;
        BottleneckWitness {
            set,
            phi,
            edges_out: cut,
            pi_s,
        }
    }

    /// Bottleneck ratio of the lazy walk over the same cut. Laziness halves
    /// every off-diagonal transition and leaves the stationary measure
    /// untouched, so the ratio is exactly half the simple-walk value.
    pub fn lazy_phi(&self) -> f64 {
        self.phi / 2.0
    }

    pub fn report(
        &self,
        graph: GraphLabel,
        sigma_seed: Option<RngSeed>,
        method: WitnessMethod,
    ) -> WitnessReport {
        WitnessReport {
            n: self.set.half_width(),
            sigma_seed,
            graph,
            phi: self.phi,
            edges_out: self.edges_out,
            set: self.set.to_vec(),
            method,
        }
    }
}

/// Which graph a witness was measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphLabel {
    #[serde(rename = "G")]
    Walk,
    #[serde(rename = "G2")]
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessMethod {
    Exact,
    Search,
    Direct,
}

/// JSON-facing witness record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    pub n: usize,
    pub sigma_seed: Option<RngSeed>,
    pub graph: GraphLabel,
    pub phi: f64,
    pub edges_out: usize,
    pub set: Vec<i64>,
    pub method: WitnessMethod,
}

/// Exact bottleneck ratio of one subset.
pub fn phi<G: Digraph>(a: &VertexSet, g: &G) -> Result<BottleneckWitness> {
    if a.is_empty() {
        return Err(Error::InvalidArgument(
            "bottleneck ratio undefined for the empty set".into(),
        ));
    }
    if a.is_full() {
        return Err(Error::InvalidArgument(
            "bottleneck ratio undefined when the complement is empty".into(),
        ));
    }
    let cut = digraph::edges_out(a, g)?;
    Ok(BottleneckWitness::from_cut(g, a.clone(), cut))
}

/// Maintains a subset and its outgoing-edge count under single-vertex
/// flips, so both exhaustive Gray-code enumeration and greedy search pay
/// O(degree) per move instead of rescanning the cut.
struct CutTracker {
    members: Vec<bool>,
    size: usize,
    cut: usize,
    out_idx: Vec<Vec<usize>>,
    in_idx: Vec<Vec<usize>>,
}

impl CutTracker {
    fn new<G: Digraph>(g: &G) -> CutTracker {
        let n = g.half_width();
        let nv = g.num_vertices();
        let mut out_idx = Vec::with_capacity(nv);
        let mut in_idx = Vec::with_capacity(nv);
        for idx in 0..nv {
            let v = crate::digraph::index_vertex(idx, n);
            out_idx.push(
                g.out_neighbors(v)
                    .iter()
                    .map(|&w| crate::digraph::vertex_index(w, n))
                    .collect(),
            );
            in_idx.push(
                g.in_neighbors(v)
                    .iter()
                    .map(|&u| crate::digraph::vertex_index(u, n))
                    .collect(),
            );
        }
        CutTracker {
            members: vec![false; nv],
            size: 0,
            cut: 0,
            out_idx,
            in_idx,
        }
    }

    /// Cut and size change if `idx` were flipped; does not mutate.
    fn delta(&self, idx: usize) -> (i64, i64) {
        let mut dcut = 0i64;
        // Self-loops never cross a cut; membership of other endpoints is
        // unaffected by flipping idx itself.
        for &w in &self.out_idx[idx] {
            if w != idx && !self.members[w] {
                dcut += 1;
            }
        }
        for &u in &self.in_idx[idx] {
            if u != idx && self.members[u] {
                dcut -= 1;
            }
        }
        if self.members[idx] {
            (-dcut, -1)
        } else {
            (dcut, 1)
        }
    }

    fn toggle(&mut self, idx: usize) {
        let (dcut, dsize) = self.delta(idx);
        self.cut = (self.cut as i64 + dcut) as usize;
        self.size = (self.size as i64 + dsize) as usize;
        self.members[idx] = !self.members[idx];
    }

    fn reset(&mut self) {
        self.members.fill(false);
        self.size = 0;
        self.cut = 0;
    }
}

/// Candidate ordering: smaller ratio first, then smaller set, then the
/// lexicographically smallest vertex list. Integer cross-multiplication
/// keeps the comparison exact, and the ordering makes the minimizer
/// independent of enumeration order.
fn candidate_better(cut_a: usize, size_a: usize, mask_a: u64, cut_b: usize, size_b: usize, mask_b: u64) -> bool {
    let lhs = cut_a as u128 * size_b as u128;
    let rhs = cut_b as u128 * size_a as u128;
    if lhs != rhs {
        return lhs < rhs;
    }
    if size_a != size_b {
        return size_a < size_b;
    }
    let diff = mask_a ^ mask_b;
    if diff == 0 {
        return false;
    }
    mask_a & (diff & diff.wrapping_neg()) != 0
}

/// Exact minimum bottleneck ratio over all nonempty subsets of at most `n`
/// vertices, found by full Gray-code enumeration. Supported up to
/// `N_MAX_EXACT`; larger graphs must use `phi_star_search`.
pub fn phi_star_exact<G: Digraph>(g: &G) -> Result<BottleneckWitness> {
    let n = g.half_width();
    if n > N_MAX_EXACT {
        return Err(Error::UnsupportedSize(format!(
            "exact enumeration supports n <= {N_MAX_EXACT}; got n = {n}. Use phi_star_search for an upper-bound witness"
        )));
    }
    let nv = g.num_vertices();
    let mut tracker = CutTracker::new(g);
    let mut mask: u64 = 0;
    let mut best: Option<(usize, usize, u64)> = None;
    for i in 1u64..(1u64 << nv) {
        let bit = i.trailing_zeros() as usize;
        tracker.toggle(bit);
        mask ^= 1 << bit;
        if tracker.size >= 1 && tracker.size <= n {
            let replace = match best {
                None => true,
                Some((cut_b, size_b, mask_b)) => {
                    candidate_better(tracker.cut, tracker.size, mask, cut_b, size_b, mask_b)
                }
            };
            if replace {
                best = Some((tracker.cut, tracker.size, mask));
            }
        }
    }
    let (cut, _size, mask) = best.expect("at least one admissible subset");
    finish_witness(g, mask_to_set(g.half_width(), mask), cut)
}

fn mask_to_set(n: usize, mask: u64) -> VertexSet {
    let mut set = VertexSet::empty(n);
    for idx in 0..(2 * n + 1) {
        if mask & (1 << idx) != 0 {
            set.insert(crate::digraph::index_vertex(idx, n))
                .expect("in range");
        }
    }
    set
}

fn finish_witness<G: Digraph>(g: &G, set: VertexSet, tracked_cut: usize) -> Result<BottleneckWitness> {
    // Independent recount guards the incremental bookkeeping.
    let recount = digraph::edges_out(&set, g)?;
    if recount != tracked_cut {
        return Err(Error::InvariantViolation(format!(
            "incremental cut {tracked_cut} disagrees with recount {recount}"
        )));
    }
    Ok(BottleneckWitness::from_cut(g, set, recount))
}

/// Heuristic upper-bound witness for the bottleneck ratio: evaluates every
/// left and right interval, then runs `budget` random restarts refined by
/// greedy single-vertex flips. Deterministic given the seed; the result is
/// an upper bound on the true minimum, never claimed exact.
pub fn phi_star_search<G: Digraph>(g: &G, seed: RngSeed, budget: usize) -> Result<BottleneckWitness> {
    if budget == 0 {
        return Err(Error::InvalidArgument("search budget must be >= 1".into()));
    }
    let n = g.half_width();
    let nv = g.num_vertices();
    let mut tracker = CutTracker::new(g);

    let mut best: Option<(usize, usize, Vec<bool>)> = None;
    let mut consider = |tracker: &CutTracker, best: &mut Option<(usize, usize, Vec<bool>)>| {
        if tracker.size == 0 || tracker.size > n {
            return;
        }
        let replace = match best {
            None => true,
            Some((cut_b, size_b, members_b)) => better_members(
                tracker.cut,
                tracker.size,
                &tracker.members,
                *cut_b,
                *size_b,
                members_b,
            ),
        };
        if replace {
            *best = Some((tracker.cut, tracker.size, tracker.members.clone()));
        }
    };

    // Interval sweeps: grow from the left end and from the right end.
    for idx in 0..n {
        tracker.toggle(idx);
        consider(&tracker, &mut best);
    }
    tracker.reset();
    for idx in (nv - n..nv).rev() {
        tracker.toggle(idx);
        consider(&tracker, &mut best);
    }

    // Random restarts with greedy descent.
    for restart in 0..budget {
        let mut rng = seed.child(restart as u64).rng();
        tracker.reset();
        let target = rand::Rng::random_range(&mut rng, 1..=n);
        let mut indices: Vec<usize> = (0..nv).collect();
        for i in 0..target {
            let j = rand::Rng::random_range(&mut rng, i..nv);
            indices.swap(i, j);
            tracker.toggle(indices[i]);
        }
        consider(&tracker, &mut best);
        greedy_descent(&mut tracker, n, &mut consider, &mut best);
    }

    // Polish the incumbent with one more greedy pass.
    if let Some((_, _, members)) = &best {
        let seed_members = members.clone();
        tracker.reset();
        for (idx, &m) in seed_members.iter().enumerate() {
            if m {
                tracker.toggle(idx);
            }
        }
        greedy_descent(&mut tracker, n, &mut consider, &mut best);
    }

    let (_, _, members) = best.expect("intervals always provide a candidate");
    let mut set = VertexSet::empty(n);
    for (idx, m) in members.iter().enumerate() {
        if *m {
            set.insert(crate::digraph::index_vertex(idx, n))?;
        }
    }
    let recount = digraph::edges_out(&set, g)?;
    Ok(BottleneckWitness::from_cut(g, set, recount))
}

fn better_members(
    cut_a: usize,
    size_a: usize,
    members_a: &[bool],
    cut_b: usize,
    size_b: usize,
    members_b: &[bool],
) -> bool {
    let lhs = cut_a as u128 * size_b as u128;
    let rhs = cut_b as u128 * size_a as u128;
    if lhs != rhs {
        return lhs < rhs;
    }
    if size_a != size_b {
        return size_a < size_b;
    }
    for (a, b) in members_a.iter().zip(members_b) {
        if a != b {
            return *a;
        }
    }
    false
}

fn greedy_descent<F>(tracker: &mut CutTracker, n: usize, consider: &mut F, best: &mut Option<(usize, usize, Vec<bool>)>)
where
    F: FnMut(&CutTracker, &mut Option<(usize, usize, Vec<bool>)>),
{
    let nv = tracker.members.len();
    for _ in 0..4 * nv {
        let mut chosen: Option<(usize, usize, usize)> = None;
        for idx in 0..nv {
            let (dcut, dsize) = tracker.delta(idx);
            let new_size = (tracker.size as i64 + dsize) as usize;
            if new_size == 0 || new_size > n {
                continue;
            }
            let new_cut = (tracker.cut as i64 + dcut) as usize;
            let improves = (new_cut as u128) * (tracker.size as u128)
                < (tracker.cut as u128) * (new_size as u128);
            if !improves {
                continue;
            }
            let better_than_chosen = match chosen {
                None => true,
                Some((c, s, _)) => {
                    (new_cut as u128) * (s as u128) < (c as u128) * (new_size as u128)
                }
            };
            if better_than_chosen {
                chosen = Some((new_cut, new_size, idx));
            }
        }
        match chosen {
            Some((_, _, idx)) => {
                tracker.toggle(idx);
                consider(tracker, best);
            }
            None => break,
        }
    }
}

/// Checks the boundary comparison between a graph and its square:
/// `|boundary(A, G^2)| <= 3 |boundary(A, G)|`. Always expected to hold.
pub fn comp12_check(a: &VertexSet, g: &PermutedDigraph) -> Result<bool> {
    let square = g.square();
    let b1 = digraph::boundary(a, g)?.len();
    let b2 = digraph::boundary(a, &square)?.len();
    Ok(b2 <= 3 * b1)
}

/// A nonnegative quantity carried in log space, with the linear value
/// attached when it fits in an f64.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogBound {
    pub ln: f64,
    pub value: Option<f64>,
}

impl LogBound {
    fn from_ln(ln: f64) -> LogBound {
        let lin = ln.exp();
        LogBound {
            ln,
            value: lin.is_finite().then_some(lin),
        }
    }
}

/// log of `binomial(n, k)`; zero-coefficient cases map to -inf.
fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let n = n as f64;
    let k = k as f64;
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

fn check_counting_args(n: usize, m: usize, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "m must satisfy 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    Ok(())
}

/// Number of size-`m` subsets of `[-n, n]` whose even and odd parts have
/// few step-2 runs: `C(2n+1, floor(2 eps m)) * C(floor(m(1+2 eps)), m)`.
pub fn counting_bound(n: usize, m: usize, eps: f64) -> Result<LogBound> {
    check_counting_args(n, m, eps)?;
    let pool = (2 * n + 1) as u64;
    let starts = (2.0 * eps * m as f64).floor() as u64;
    let slots = (m as f64 * (1.0 + 2.0 * eps)).floor() as u64;
    Ok(LogBound::from_ln(
        ln_choose(pool, starts) + ln_choose(slots, m as u64),
    ))
}

/// `counting_bound` divided by the number of all size-`m` subsets.
pub fn ratio_bound(n: usize, m: usize, eps: f64) -> Result<LogBound> {
    let counting = counting_bound(n, m, eps)?;
    let pool = (2 * n + 1) as u64;
    Ok(LogBound::from_ln(counting.ln - ln_choose(pool, m as u64)))
}

/// Which union-bound sum to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnionBoundForm {
    /// `sum_{m=1}^{n/2} C(n, floor(eps m))^4 / C(n, m)` — the compact form
    /// whose limit is zero for small eps.
    FourthPower,
    /// `sum_{m=1}^{n} C(2n+1, floor(2 eps m))^2 C(floor(m(1+2 eps)), m)^2
    /// / C(2n+1, m)` — the form arising from two-step neighborhood counts.
    ComponentProduct,
}

/// Evaluates the chosen union-bound sum in log space (log-gamma terms
/// combined by log-sum-exp); returns the natural log of the sum.
pub fn union_bound_sum(n: usize, eps: f64, form: UnionBoundForm) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.125) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1/8), got {eps}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let terms: Vec<f64> = match form {
        UnionBoundForm::FourthPower => (1..=n / 2)
            .map(|m| {
                let k = (eps * m as f64).floor() as u64;
                4.0 * ln_choose(n as u64, k) - ln_choose(n as u64, m as u64)
            })
            .collect(),
        UnionBoundForm::ComponentProduct => {
            let pool = (2 * n + 1) as u64;
            (1..=n)
                .map(|m| {
                    let starts = (2.0 * eps * m as f64).floor() as u64;
                    let slots = (m as f64 * (1.0 + 2.0 * eps)).floor() as u64;
                    2.0 * ln_choose(pool, starts) + 2.0 * ln_choose(slots, m as u64)
                        - ln_choose(pool, m as u64)
                })
                .collect()
        }
    };
    Ok(log_sum_exp(&terms))
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|&t| (t - max).exp()).sum::<f64>().ln()
}
