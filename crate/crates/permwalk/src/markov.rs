//! Exact Markov-chain computations for the permuted walk: transition
//! kernels, expected hitting times, Green's functions, and mixing traces.
//!
//! Hitting times for a target set solve `h = 1 + Q h` on the non-target
//! states, where `Q` is the kernel restricted to those states. Small
//! systems (up to `DIRECT_STATE_LIMIT` states) go through Gaussian
//! elimination with partial pivoting and one step of iterative refinement;
//! larger ones fall back to damped Gauss-Seidel sweeps, which converge
//! because the restricted kernel of an irreducible chain is substochastic.
//!
//! All-pairs worst-case hitting times use the fundamental-matrix identity
//! `E_x(tau_y) = (Z(y,y) - Z(x,y)) / pi(y)` with
//! `Z = (I - P + 1 pi^T)^{-1}`, which costs one matrix inversion instead of
//! `2n+1` independent solves. A per-target residual audit of the defining
//! equations guards the algebra.

use crate::digraph::{index_vertex, vertex_index, PermutedDigraph, VertexSet};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, Write};

/// Absolute residual target for hitting-time solves. For solutions with
/// very large entries the attainable floor scales with the solution norm,
/// so the effective target is `max(RESIDUAL_TARGET, 1e-14 * |h|_inf)`.
pub const RESIDUAL_TARGET: f64 = 1e-10;

/// Row-update budget for the iterative fallback solver.
pub const ROW_UPDATE_CAP: u64 = 10_000_000;

/// Largest restricted system handled by direct elimination.
pub const DIRECT_STATE_LIMIT: usize = 2001;

const GS_DAMPING: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkMode {
    Simple,
    Lazy,
}

impl fmt::Display for WalkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalkMode::Simple => write!(f, "simple"),
            WalkMode::Lazy => write!(f, "lazy"),
        }
    }
}

/// Row-sparse stochastic matrix of the walk, stored in CSR form.
/// Rows have two entries of 1/2 in simple mode (merged if they ever
/// coincide) and a 1/2 self entry plus halved walk entries in lazy mode.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    n: usize,
    mode: WalkMode,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    probs: Vec<f64>,
}

/// Builds the kernel of the simple or lazy walk on `g`. Row-stochasticity
/// and uniform stationarity are asserted on every construction; both follow
/// from the graph's Eulerian 2-regularity.
pub fn kernel(g: &PermutedDigraph, mode: WalkMode) -> TransitionKernel {
    let n = g.half_width();
    let nv = g.num_vertices();
    let mut row_ptr = Vec::with_capacity(nv + 1);
    let mut cols = Vec::new();
    let mut probs = Vec::new();
    row_ptr.push(0);
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(3);
    for idx in 0..nv {
        let v = index_vertex(idx, n);
        entries.clear();
        let step_mass = match mode {
            WalkMode::Simple => 0.5,
            WalkMode::Lazy => 0.25,
        };
        if mode == WalkMode::Lazy {
            entries.push((idx, 0.5));
        }
        for &w in g.out_neighbors(v) {
            entries.push((vertex_index(w, n), step_mass));
        }
        entries.sort_by_key(|&(c, _)| c);
        // Merge duplicate targets (self-loops under laziness, and any
        // coincident transitions, kept as one entry).
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for &(c, p) in entries.iter() {
            match merged.last_mut() {
                Some((lc, lp)) if *lc == c => *lp += p,
                _ => merged.push((c, p)),
            }
        }
        let row_sum: f64 = merged.iter().map(|&(_, p)| p).sum();
        assert!(
            (row_sum - 1.0).abs() <= 1e-12,
            "row {v} sums to {row_sum}, not 1"
        );
        for (c, p) in merged.drain(..) {
            cols.push(c);
            probs.push(p);
        }
        row_ptr.push(cols.len());
    }
    let k = TransitionKernel {
        n,
        mode,
        row_ptr,
        cols,
        probs,
    };
    let stat = k.stationarity_residual();
    assert!(
        stat <= 1e-12,
        "uniform distribution is not stationary: residual {stat}"
    );
    k
}

impl TransitionKernel {
    pub fn half_width(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> WalkMode {
        self.mode
    }

    pub fn num_states(&self) -> usize {
        2 * self.n + 1
    }

    /// Sparse row of state index `i` as parallel (column, probability) slices.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.cols[lo..hi], &self.probs[lo..hi])
    }

    /// Transition probability between two vertices.
    pub fn prob(&self, from: i64, to: i64) -> f64 {
        let (cols, probs) = self.row(vertex_index(from, self.n));
        let target = vertex_index(to, self.n);
        cols.iter()
            .zip(probs)
            .find(|&(&c, _)| c == target)
            .map(|(_, &p)| p)
            .unwrap_or(0.0)
    }

    /// One step of distribution evolution: `out = mu P`.
    pub fn evolve(&self, mu: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, &mass) in mu.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let (cols, probs) = self.row(i);
            for (&c, &p) in cols.iter().zip(probs) {
                out[c] += mass * p;
            }
        }
    }

    /// `max_j |(u P)(j) - u(j)|` for the uniform distribution `u`.
    pub fn stationarity_residual(&self) -> f64 {
        let nv = self.num_states();
        let u = vec![1.0 / nv as f64; nv];
        let mut out = vec![0.0; nv];
        self.evolve(&u, &mut out);
        out.iter()
            .zip(&u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn check_vertex(&self, v: i64) -> Result<()> {
        let half = self.n as i64;
        if v < -half || v > half {
            return Err(Error::InvalidArgument(format!(
                "vertex {v} outside [-{}, {}]",
                self.n, self.n
            )));
        }
        Ok(())
    }
}

/// Expected hitting times of one target set from every start.
#[derive(Debug, Clone)]
pub struct HittingTable {
    pub n: usize,
    pub mode: WalkMode,
    pub target: VertexSet,
    values: Vec<f64>,
    /// Max absolute defect of the defining equations, `|(I-Q)h - 1|_inf`.
    pub residual: f64,
}

impl HittingTable {
    pub fn value_at(&self, start: i64) -> f64 {
        self.values[vertex_index(start, self.n)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// CSV rows `start,target,mode,expected_steps,residual`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "start,target,mode,expected_steps,residual")?;
        let label = target_label(&self.target);
        for idx in 0..self.values.len() {
            writeln!(
                w,
                "{},{},{},{:?},{:?}",
                index_vertex(idx, self.n),
                label,
                self.mode,
                self.values[idx],
                self.residual
            )?;
        }
        Ok(())
    }
}

fn target_label(target: &VertexSet) -> String {
    let vs = target.to_vec();
    if vs.len() == 1 {
        format!("{}", vs[0])
    } else {
        let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
        format!("set:{}", parts.join(" "))
    }
}

/// Solves the expected hitting time of `target` from every start state.
pub fn hitting_times(k: &TransitionKernel, target: &VertexSet) -> Result<HittingTable> {
    if target.is_empty() {
        return Err(Error::InvalidArgument("target set is empty".into()));
    }
    if target.half_width() != k.half_width() {
        return Err(Error::InvalidArgument(format!(
            "target on [-{0}, {0}] does not match kernel on [-{1}, {1}]",
            target.half_width(),
            k.half_width()
        )));
    }
    let nv = k.num_states();
    let mut local_of = vec![usize::MAX; nv];
    let mut global_of = Vec::new();
    for (idx, slot) in local_of.iter_mut().enumerate() {
        if !target.contains(index_vertex(idx, k.n)) {
            *slot = global_of.len();
            global_of.push(idx);
        }
    }
    let m = global_of.len();
    let mut h = vec![0.0; m];
    if m > 0 {
        if m <= DIRECT_STATE_LIMIT {
            solve_restricted_direct(k, &local_of, &global_of, &mut h)?;
        } else {
            solve_restricted_gauss_seidel(k, &local_of, &global_of, &mut h)?;
        }
    }

    let mut values = vec![0.0; nv];
    for (local, &global) in global_of.iter().enumerate() {
        values[global] = h[local];
    }
    let residual = restricted_residual(k, &local_of, &global_of, &h);
    let h_inf = h.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if residual > effective_tolerance(h_inf) {
        return Err(Error::Convergence {
            residual,
            row_updates: 0,
            target: effective_tolerance(h_inf),
        });
    }
    Ok(HittingTable {
        n: k.n,
        mode: k.mode,
        target: target.clone(),
        values,
        residual,
    })
}

fn effective_tolerance(h_inf: f64) -> f64 {
    RESIDUAL_TARGET.max(1e-14 * h_inf)
}

/// `max_x |h(x) - 1 - sum_z Q(x,z) h(z)|` over restricted states.
fn restricted_residual(
    k: &TransitionKernel,
    local_of: &[usize],
    global_of: &[usize],
    h: &[f64],
) -> f64 {
    let mut worst = 0.0f64;
    for (local, &global) in global_of.iter().enumerate() {
        let (cols, probs) = k.row(global);
        let mut acc = h[local] - 1.0;
        for (&c, &p) in cols.iter().zip(probs) {
            if local_of[c] != usize::MAX {
                acc -= p * h[local_of[c]];
            }
        }
        worst = worst.max(acc.abs());
    }
    worst
}

fn solve_restricted_direct(
    k: &TransitionKernel,
    local_of: &[usize],
    global_of: &[usize],
    h: &mut [f64],
) -> Result<()> {
    let m = global_of.len();
    let mut a = vec![0.0; m * m];
    for (local, &global) in global_of.iter().enumerate() {
        a[local * m + local] += 1.0;
        let (cols, probs) = k.row(global);
        for (&c, &p) in cols.iter().zip(probs) {
            if local_of[c] != usize::MAX {
                a[local * m + local_of[c]] -= p;
            }
        }
    }
    let a_orig = a.clone();
    let ipiv = lu_factor(&mut a, m)?;
    h.fill(1.0);
    lu_solve(&a, &ipiv, m, h);

    // One round of iterative refinement pushes the residual back toward
    // machine level after the elimination.
    let mut r = vec![0.0; m];
    for i in 0..m {
        let mut acc = 1.0;
        for j in 0..m {
            acc -= a_orig[i * m + j] * h[j];
        }
        r[i] = acc;
    }
    lu_solve(&a, &ipiv, m, &mut r);
    for i in 0..m {
        h[i] += r[i];
    }
    Ok(())
}

fn solve_restricted_gauss_seidel(
    k: &TransitionKernel,
    local_of: &[usize],
    global_of: &[usize],
    h: &mut [f64],
) -> Result<()> {
    let m = global_of.len();
    let mut updates: u64 = 0;
    loop {
        for (local, &global) in global_of.iter().enumerate() {
            let (cols, probs) = k.row(global);
            let mut acc = 1.0;
            let mut self_mass = 0.0;
            for (&c, &p) in cols.iter().zip(probs) {
                let lc = local_of[c];
                if lc == usize::MAX {
                    continue;
                }
                if lc == local {
                    self_mass = p;
                } else {
                    acc += p * h[lc];
                }
            }
            let update = acc / (1.0 - self_mass);
            h[local] = (1.0 - GS_DAMPING) * h[local] + GS_DAMPING * update;
        }
        updates += m as u64;
        let residual = restricted_residual(k, local_of, global_of, h);
        let h_inf = h.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if residual <= effective_tolerance(h_inf) {
            return Ok(());
        }
        if updates >= ROW_UPDATE_CAP {
            return Err(Error::Convergence {
                residual,
                row_updates: updates,
                target: effective_tolerance(h_inf),
            });
        }
    }
}

/// Exact expected hitting times for every ordered pair, from one
/// fundamental-matrix inversion.
#[derive(Debug, Clone)]
pub struct AllPairsHitting {
    pub n: usize,
    pub mode: WalkMode,
    /// Row-major by start: `values[start_idx * nv + target_idx]`.
    values: Vec<f64>,
    /// Max over targets of the defining-equation defect, scaled per target
    /// by `max(1, |h|_inf)`.
    pub max_scaled_residual: f64,
}

impl AllPairsHitting {
    pub fn value(&self, start: i64, target: i64) -> f64 {
        let nv = 2 * self.n + 1;
        self.values[vertex_index(start, self.n) * nv + vertex_index(target, self.n)]
    }

    pub fn num_states(&self) -> usize {
        2 * self.n + 1
    }
}

/// Worst-case expected hitting time and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub value: f64,
    pub start: i64,
    pub target: i64,
}

pub fn all_pairs_hitting(k: &TransitionKernel) -> Result<AllPairsHitting> {
    let nv = k.num_states();
    // M = I - P + J/nv is nonsingular for an irreducible chain.
    let mut m = vec![1.0 / nv as f64; nv * nv];
    for i in 0..nv {
        m[i * nv + i] += 1.0;
        let (cols, probs) = k.row(i);
        for (&c, &p) in cols.iter().zip(probs) {
            m[i * nv + c] -= p;
        }
    }
    let ipiv = lu_factor(&mut m, nv)?;
    let mut z = vec![0.0; nv * nv];
    for i in 0..nv {
        z[i * nv + i] = 1.0;
    }
    lu_solve_matrix(&m, &ipiv, nv, &mut z);

    let mut values = vec![0.0; nv * nv];
    for x in 0..nv {
        for y in 0..nv {
            values[x * nv + y] = (z[y * nv + y] - z[x * nv + y]) * nv as f64;
        }
    }

    // Residual audit of h(x) = 1 + sum_z P(x,z) h(z) per target column.
    let mut max_scaled = 0.0f64;
    for y in 0..nv {
        let mut h_inf = 0.0f64;
        for x in 0..nv {
            h_inf = h_inf.max(values[x * nv + y].abs());
        }
        let mut worst = 0.0f64;
        for x in 0..nv {
            if x == y {
                continue;
            }
            let (cols, probs) = k.row(x);
            let mut acc = values[x * nv + y] - 1.0;
            for (&c, &p) in cols.iter().zip(probs) {
                if c != y {
                    acc -= p * values[c * nv + y];
                }
            }
            worst = worst.max(acc.abs());
        }
        max_scaled = max_scaled.max(worst / h_inf.max(1.0));
    }
    if max_scaled > RESIDUAL_TARGET {
        return Err(Error::Convergence {
            residual: max_scaled,
            row_updates: 0,
            target: RESIDUAL_TARGET,
        });
    }
    Ok(AllPairsHitting {
        n: k.n,
        mode: k.mode,
        values,
        max_scaled_residual: max_scaled,
    })
}

/// Maximum of `E_x(tau_y)` over all ordered pairs. Ties within a relative
/// 1e-9 of the maximum are broken toward the smallest `(target, start)`
/// pair, which keeps reports deterministic in the presence of symmetric
/// values that differ only by rounding.
pub fn worst_case_hitting(k: &TransitionKernel) -> Result<WorstCase> {
    let table = all_pairs_hitting(k)?;
    Ok(worst_case_of(&table))
}

pub fn worst_case_of(table: &AllPairsHitting) -> WorstCase {
    let nv = table.num_states();
    let n = table.n;
    let mut vmax = 0.0f64;
    for x in 0..nv {
        for y in 0..nv {
            vmax = vmax.max(table.values[x * nv + y]);
        }
    }
    let tol = vmax * 1e-9;
    for y in 0..nv {
        for x in 0..nv {
            if table.values[x * nv + y] >= vmax - tol {
                return WorstCase {
                    value: vmax,
                    start: index_vertex(x, n),
                    target: index_vertex(y, n),
                };
            }
        }
    }
    unreachable!("maximum exists");
}

/// `Gamma_H(x, y) = sum_{t=0}^{H} P^t(x, y)`: expected visits to `y` in the
/// first `H` steps starting from `x`.
pub fn greens_function(k: &TransitionKernel, x: i64, y: i64, horizon: usize) -> Result<f64> {
    k.check_vertex(x)?;
    k.check_vertex(y)?;
    Ok(occupation_trace(k, x, y, horizon).iter().sum())
}

/// Exact second moment of the visit count over `t in [0, horizon]`,
/// computed from `E(Z^2) = Gamma + 2 sum_{i<j} P^i(x,y) P^{j-i}(y,y)` via
/// prefix sums of the two occupation traces.
pub fn visit_second_moment(k: &TransitionKernel, x: i64, y: i64, horizon: usize) -> Result<f64> {
    k.check_vertex(x)?;
    k.check_vertex(y)?;
    let a = occupation_trace(k, x, y, horizon);
    let b = occupation_trace(k, y, y, horizon);
    let mut prefix = vec![0.0; horizon + 1];
    let mut acc = 0.0;
    for (t, &v) in a.iter().enumerate() {
        acc += v;
        prefix[t] = acc;
    }
    let gamma: f64 = prefix[horizon];
    let mut cross = 0.0;
    for d in 1..=horizon {
        cross += b[d] * prefix[horizon - d];
    }
    Ok(gamma + 2.0 * cross)
}

/// `P^t(x, y)` for `t = 0..=horizon`.
fn occupation_trace(k: &TransitionKernel, x: i64, y: i64, horizon: usize) -> Vec<f64> {
    let nv = k.num_states();
    let mut mu = vec![0.0; nv];
    let mut next = vec![0.0; nv];
    mu[vertex_index(x, k.n)] = 1.0;
    let target = vertex_index(y, k.n);
    let mut trace = Vec::with_capacity(horizon + 1);
    trace.push(mu[target]);
    for _ in 0..horizon {
        k.evolve(&mu, &mut next);
        std::mem::swap(&mut mu, &mut next);
        trace.push(mu[target]);
    }
    trace
}

/// Total-variation and sup-norm traces of the lazy walk, per time step up
/// to `t_max`, with the mixing time (first `t` where every start is within
/// 1/4 of stationarity in total variation) when attained.
#[derive(Debug, Clone)]
pub struct MixingProfile {
    pub n: usize,
    pub mode: WalkMode,
    /// `max_x d_TV(P^t(x, .), pi)` for `t = 0..=t_max`.
    pub max_tv: Vec<f64>,
    /// `max_{x,y} |P^t(x, y) - 1/(2n+1)|` for `t = 0..=t_max`.
    pub linf: Vec<f64>,
    pub t_mix: Option<usize>,
}

impl MixingProfile {
    /// CSV rows `t,max_tv,linf,t_mix_flag`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,max_tv,linf,t_mix_flag")?;
        for t in 0..self.max_tv.len() {
            let flag = if self.t_mix == Some(t) { 1 } else { 0 };
            writeln!(w, "{t},{:?},{:?},{flag}", self.max_tv[t], self.linf[t])?;
        }
        Ok(())
    }
}

/// Exact mixing traces by per-start distribution evolution. Mixing claims
/// in this crate are only made for the lazy walk, so simple-mode kernels
/// are rejected.
pub fn mixing_profile(k: &TransitionKernel, t_max: usize) -> Result<MixingProfile> {
    require_lazy(k)?;
    let nv = k.num_states();
    let pi = 1.0 / nv as f64;
    let mut max_tv = vec![0.0f64; t_max + 1];
    let mut linf = vec![0.0f64; t_max + 1];
    let mut mu = vec![0.0; nv];
    let mut next = vec![0.0; nv];
    for start in 0..nv {
        mu.fill(0.0);
        mu[start] = 1.0;
        for t in 0..=t_max {
            let mut tv = 0.0;
            let mut dev = 0.0f64;
            for &mass in &mu {
                tv += (mass - pi).abs();
                dev = dev.max((mass - pi).abs());
            }
            max_tv[t] = max_tv[t].max(tv / 2.0);
            linf[t] = linf[t].max(dev);
            if t < t_max {
                k.evolve(&mu, &mut next);
                std::mem::swap(&mut mu, &mut next);
            }
        }
    }
    let t_mix = max_tv.iter().position(|&d| d < 0.25);
    Ok(MixingProfile {
        n: k.n,
        mode: k.mode,
        max_tv,
        linf,
        t_mix,
    })
}

/// Mixing time only, with per-start early stopping: since total variation
/// to the stationary distribution never increases, the first sub-1/4 time
/// of each start can be found independently and the mixing time is their
/// maximum. Equal to `mixing_profile(k, cap).t_mix` at a fraction of the
/// cost. `None` when some start stays above 1/4 through `cap`.
pub fn t_mix_lazy(k: &TransitionKernel, cap: usize) -> Result<Option<usize>> {
    require_lazy(k)?;
    let nv = k.num_states();
    let pi = 1.0 / nv as f64;
    let mut worst = 0usize;
    let mut mu = vec![0.0; nv];
    let mut next = vec![0.0; nv];
    'starts: for start in 0..nv {
        mu.fill(0.0);
        mu[start] = 1.0;
        for t in 0..=cap {
            let tv: f64 = mu.iter().map(|&m| (m - pi).abs()).sum::<f64>() / 2.0;
            if tv < 0.25 {
                worst = worst.max(t);
                continue 'starts;
            }
            if t < cap {
                k.evolve(&mu, &mut next);
                std::mem::swap(&mut mu, &mut next);
            }
        }
        return Ok(None);
    }
    Ok(Some(worst))
}

fn require_lazy(k: &TransitionKernel) -> Result<()> {
    if k.mode != WalkMode::Lazy {
        return Err(Error::InvalidArgument(
            "mixing diagnostics are defined for the lazy kernel".into(),
        ));
    }
    Ok(())
}

/// `P_pi(tau_y >= steps)` for the given kernel, by exact evolution of the
/// stationary distribution with `y` absorbing (mass through `y` removed).
pub fn survival_from_stationarity(k: &TransitionKernel, y: i64, steps: usize) -> Result<f64> {
    k.check_vertex(y)?;
    if steps == 0 {
        return Ok(1.0);
    }
    let nv = k.num_states();
    let target = vertex_index(y, k.n);
    let mut nu = vec![1.0 / nv as f64; nv];
    nu[target] = 0.0;
    let mut next = vec![0.0; nv];
    for _ in 1..steps {
        k.evolve(&nu, &mut next);
        std::mem::swap(&mut nu, &mut next);
        nu[target] = 0.0;
    }
    Ok(nu.iter().sum())
}

// ---------------------------------------------------------------------------
// Dense elimination kernel shared by the hitting-time solvers.

/// In-place LU factorization with partial pivoting; returns the pivot rows.
fn lu_factor(a: &mut [f64], nn: usize) -> Result<Vec<usize>> {
    let mut ipiv = vec![0usize; nn];
    for col in 0..nn {
        let mut pmax = a[col * nn + col].abs();
        let mut prow = col;
        for r in col + 1..nn {
            let v = a[r * nn + col].abs();
            if v > pmax {
                pmax = v;
                prow = r;
            }
        }
        if pmax == 0.0 {
            return Err(Error::InvariantViolation(
                "singular linear system in hitting-time solve".into(),
            ));
        }
        ipiv[col] = prow;
        if prow != col {
            for j in 0..nn {
                a.swap(col * nn + j, prow * nn + j);
            }
        }
        let (before, after) = a.split_at_mut((col + 1) * nn);
        let pivot_row = &before[col * nn..(col + 1) * nn];
        let inv = 1.0 / pivot_row[col];
        for row in after.chunks_exact_mut(nn) {
            let factor = row[col] * inv;
            if factor != 0.0 {
                row[col] = factor;
                for j in col + 1..nn {
                    row[j] -= factor * pivot_row[j];
                }
            } else {
                row[col] = 0.0;
            }
        }
    }
    Ok(ipiv)
}

/// Solves one right-hand side in place using a prior `lu_factor` result.
fn lu_solve(lu: &[f64], ipiv: &[usize], nn: usize, b: &mut [f64]) {
    for (col, &p) in ipiv.iter().enumerate() {
        b.swap(col, p);
    }
    for i in 0..nn {
        let mut acc = b[i];
        for k in 0..i {
            acc -= lu[i * nn + k] * b[k];
        }
        b[i] = acc;
    }
    for i in (0..nn).rev() {
        let mut acc = b[i];
        for k in i + 1..nn {
            acc -= lu[i * nn + k] * b[k];
        }
        b[i] = acc / lu[i * nn + i];
    }
}

/// Solves `M X = B` for a full row-major right-hand-side matrix in place.
/// Row-wise triangular updates keep the inner loops contiguous.
fn lu_solve_matrix(lu: &[f64], ipiv: &[usize], nn: usize, x: &mut [f64]) {
    for (col, &p) in ipiv.iter().enumerate() {
        if p != col {
            for j in 0..nn {
                x.swap(col * nn + j, p * nn + j);
            }
        }
    }
    for i in 0..nn {
        let (done, rest) = x.split_at_mut(i * nn);
        let row_i = &mut rest[..nn];
        for k in 0..i {
            let f = lu[i * nn + k];
            if f != 0.0 {
                let row_k = &done[k * nn..(k + 1) * nn];
                for j in 0..nn {
                    row_i[j] -= f * row_k[j];
                }
            }
        }
    }
    for i in (0..nn).rev() {
        let (head, tail) = x.split_at_mut((i + 1) * nn);
        let row_i = &mut head[i * nn..];
        for k in i + 1..nn {
            let f = lu[i * nn + k];
            if f != 0.0 {
                let row_k = &tail[(k - i - 1) * nn..(k - i) * nn];
                for j in 0..nn {
                    row_i[j] -= f * row_k[j];
                }
            }
        }
        let inv = 1.0 / lu[i * nn + i];
        for v in row_i.iter_mut() {
            *v *= inv;
        }
    }
}
