//! The transition digraph of a permuted walk, its square, and the
//! set/boundary/distance primitives that expansion analysis needs.
//!
//! For a permutation `sigma` of `[-n, n]`, the digraph has out-edges
//! `(x, sigma(x-1))` and `(x, sigma(x+1))` at interior vertices; the
//! endpoints reuse their own point, so `-n` goes to `sigma(-n)` or
//! `sigma(-n+1)` and `n` goes to `sigma(n-1)` or `sigma(n)`. Every vertex
//! has in-degree and out-degree exactly 2, so the graph is Eulerian, and it
//! is strongly connected for every `sigma`; construction verifies both.

use crate::error::{Error, Result};
use crate::perm::Permutation;
use std::collections::VecDeque;
use std::io::{self, Write};

/// Common view over the 2-regular walk digraph and its 4-regular square.
pub trait Digraph {
    fn half_width(&self) -> usize;
    /// Uniform out-degree (2 for the walk digraph, 4 for its square).
    fn out_degree(&self) -> usize;
    /// Out-neighbors with multiplicity, in construction order.
    fn out_neighbors(&self, v: i64) -> &[i64];
    /// In-neighbors with multiplicity.
    fn in_neighbors(&self, v: i64) -> &[i64];

    fn num_vertices(&self) -> usize {
        2 * self.half_width() + 1
    }
}

pub(crate) fn vertex_index(v: i64, n: usize) -> usize {
    (v + n as i64) as usize
}

pub(crate) fn index_vertex(idx: usize, n: usize) -> i64 {
    idx as i64 - n as i64
}

/// The walk digraph of one permutation. Immutable after construction.
#[derive(Debug, Clone)]
pub struct PermutedDigraph {
    n: usize,
    sigma: Permutation,
    out_adj: Vec<[i64; 2]>,
    in_adj: Vec<Vec<i64>>,
}

impl PermutedDigraph {
    /// Half-width of the vertex interval `[-n, n]`.
    pub fn half_width(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        2 * self.n + 1
    }

    /// Out-neighbors of `v`, in construction order.
    pub fn out_neighbors(&self, v: i64) -> &[i64] {
        &self.out_adj[vertex_index(v, self.n)]
    }

    /// Builds the digraph and verifies 2-in/2-out regularity and strong
    /// connectivity. A failure of either check would contradict properties
    /// that hold for every permutation, so it surfaces as an internal
    /// invariant error rather than bad input.
    pub fn build(sigma: Permutation) -> Result<PermutedDigraph> {
        let n = sigma.half_width();
        let half = n as i64;
        let len = 2 * n + 1;
        let mut out_adj = Vec::with_capacity(len);
        for idx in 0..len {
            let x = index_vertex(idx, n);
            let (a, b) = if x == -half {
                (-half, -half + 1)
            } else if x == half {
                (half - 1, half)
            } else {
                (x - 1, x + 1)
            };
            out_adj.push([sigma.apply_unchecked(a), sigma.apply_unchecked(b)]);
        }

        let mut in_adj = vec![Vec::with_capacity(2); len];
        for (idx, targets) in out_adj.iter().enumerate() {
            let u = index_vertex(idx, n);
            for &w in targets {
                in_adj[vertex_index(w, n)].push(u);
            }
        }
        if let Some(bad) = in_adj.iter().position(|l| l.len() != 2) {
            return Err(Error::InvariantViolation(format!(
                "vertex {} has in-degree {}, expected 2",
                index_vertex(bad, n),
                in_adj[bad].len()
            )));
        }

        let graph = PermutedDigraph {
            n,
            sigma,
            out_adj,
            in_adj,
        };
        let indexed: Vec<Vec<usize>> = (0..len)
            .map(|idx| {
                graph.out_adj[idx]
                    .iter()
                    .map(|&w| vertex_index(w, n))
                    .collect()
            })
            .collect();
        if !is_strongly_connected(&indexed) {
            return Err(Error::InvariantViolation(
                "walk digraph is not strongly connected".into(),
            ));
        }
        Ok(graph)
    }

    pub fn sigma(&self) -> &Permutation {
        &self.sigma
    }

    /// Materializes the square digraph: one edge per directed path of
    /// length 2, so out-neighbors come with multiplicity and the result is
    /// 4-regular. Built on demand, never cached.
    pub fn square(&self) -> SquareDigraph {
        let len = self.num_vertices();
        let mut out_adj = Vec::with_capacity(len);
        for idx in 0..len {
            let [w1, w2] = self.out_adj[idx];
            let a = self.out_adj[vertex_index(w1, self.n)];
            let b = self.out_adj[vertex_index(w2, self.n)];
            out_adj.push([a[0], a[1], b[0], b[1]]);
        }
        let mut in_adj = vec![Vec::with_capacity(4); len];
        for (idx, targets) in out_adj.iter().enumerate() {
            let u = index_vertex(idx, self.n);
            for &w in targets {
                in_adj[vertex_index(w, self.n)].push(u);
            }
        }
        SquareDigraph {
            n: self.n,
            out_adj,
            in_adj,
        }
    }

    /// Length of the shortest directed path from `x` to `y` (0 when equal).
    /// Unreachability cannot happen in a correctly built digraph, so it is
    /// reported as an invariant violation.
    pub fn distance(&self, x: i64, y: i64) -> Result<usize> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        if x == y {
            return Ok(0);
        }
        let mut dist = vec![usize::MAX; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[vertex_index(x, self.n)] = 0;
        queue.push_back(x);
        while let Some(u) = queue.pop_front() {
            let du = dist[vertex_index(u, self.n)];
            for &w in &self.out_adj[vertex_index(u, self.n)] {
                let slot = &mut dist[vertex_index(w, self.n)];
                if *slot == usize::MAX {
                    *slot = du + 1;
                    if w == y {
                        return Ok(du + 1);
                    }
                    queue.push_back(w);
                }
            }
        }
        Err(Error::InvariantViolation(format!(
            "no directed path from {x} to {y}"
        )))
    }

    /// All vertices within directed distance `r` of `w`.
    pub fn ball(&self, w: i64, r: usize) -> Result<VertexSet> {
        self.check_vertex(w)?;
        let mut set = VertexSet::empty(self.n);
        let mut dist = vec![usize::MAX; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[vertex_index(w, self.n)] = 0;
        set.insert(w)?;
        queue.push_back(w);
        while let Some(u) = queue.pop_front() {
            let du = dist[vertex_index(u, self.n)];
            if du == r {
                continue;
            }
            for &t in &self.out_adj[vertex_index(u, self.n)] {
                let slot = &mut dist[vertex_index(t, self.n)];
                if *slot == usize::MAX {
                    *slot = du + 1;
                    set.insert(t)?;
                    queue.push_back(t);
                }
            }
        }
        Ok(set)
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

impl Digraph for PermutedDigraph {
    fn half_width(&self) -> usize {
        self.n
    }

    fn out_degree(&self) -> usize {
        2
    }

    fn out_neighbors(&self, v: i64) -> &[i64] {
        &self.out_adj[vertex_index(v, self.n)]
    }

    fn in_neighbors(&self, v: i64) -> &[i64] {
        &self.in_adj[vertex_index(v, self.n)]
    }
}

/// Square of a walk digraph: 4-regular, edges carry multiplicity.
#[derive(Debug, Clone)]
pub struct SquareDigraph {
    n: usize,
    out_adj: Vec<[i64; 4]>,
    in_adj: Vec<Vec<i64>>,
}

impl SquareDigraph {
    pub fn half_width(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        2 * self.n + 1
    }

    pub fn out_neighbors(&self, v: i64) -> &[i64] {
        &self.out_adj[vertex_index(v, self.n)]
    }
}

impl Digraph for SquareDigraph {
    fn half_width(&self) -> usize {
        self.n
    }

    fn out_degree(&self) -> usize {
        4
    }

    fn out_neighbors(&self, v: i64) -> &[i64] {
        &self.out_adj[vertex_index(v, self.n)]
    }

    fn in_neighbors(&self, v: i64) -> &[i64] {
        &self.in_adj[vertex_index(v, self.n)]
    }
}

/// True iff the digraph given as 0-indexed adjacency lists has a single
/// strongly connected component covering every vertex. Iterative Kosaraju;
/// recursion would overflow on long path-like graphs.
pub fn is_strongly_connected(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    if n <= 1 {
        return true;
    }

    // Pass 1: finish order on the original graph.
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push((start, 0));
        while let Some(&mut (v, ref mut edge)) = stack.last_mut() {
            if *edge < adj[v].len() {
                let w = adj[v][*edge];
                *edge += 1;
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }

    let mut rev = vec![Vec::new(); n];
    for (v, targets) in adj.iter().enumerate() {
        for &w in targets {
            rev[w].push(v);
        }
    }

    // Pass 2: one DFS on the reverse graph from the last-finished vertex
    // must reach everything.
    let mut seen = vec![false; n];
    let root = *order.last().expect("nonempty graph");
    let mut work = vec![root];
    seen[root] = true;
    let mut reached = 1usize;
    while let Some(v) = work.pop() {
        for &w in &rev[v] {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                work.push(w);
            }
        }
    }
    reached == n
}

/// A subset of `[-n, n]`, one bit per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    n: usize,
    bits: Vec<u64>,
    count: usize,
}

impl VertexSet {
    pub fn empty(n: usize) -> VertexSet {
        let len = 2 * n + 1;
        VertexSet {
            n,
            bits: vec![0; len.div_ceil(64)],
            count: 0,
        }
    }

    pub fn full(n: usize) -> VertexSet {
        let mut set = VertexSet::empty(n);
        for v in -(n as i64)..=n as i64 {
            set.insert(v).expect("in range");
        }
        set
    }

    pub fn from_vertices(n: usize, vertices: &[i64]) -> Result<VertexSet> {
        let mut set = VertexSet::empty(n);
        for &v in vertices {
            set.insert(v)?;
        }
        Ok(set)
    }

    pub fn half_width(&self) -> usize {
        self.n
    }

    pub fn universe_len(&self) -> usize {
        2 * self.n + 1
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn is_full(&self) -> bool {
        self.count == self.universe_len()
    }

    pub fn insert(&mut self, v: i64) -> Result<()> {
        let idx = self.checked_index(v)?;
        let (block, bit) = (idx / 64, idx % 64);
        if self.bits[block] & (1 << bit) == 0 {
            self.bits[block] |= 1 << bit;
            self.count += 1;
        }
        Ok(())
    }

    pub fn remove(&mut self, v: i64) -> Result<()> {
        let idx = self.checked_index(v)?;
        let (block, bit) = (idx / 64, idx % 64);
        if self.bits[block] & (1 << bit) != 0 {
            self.bits[block] &= !(1 << bit);
            self.count -= 1;
        }
        Ok(())
    }

    pub fn contains(&self, v: i64) -> bool {
        let half = self.n as i64;
        if v < -half || v > half {
            return false;
        }
        let idx = vertex_index(v, self.n);
        self.bits[idx / 64] & (1 << (idx % 64)) != 0
    }

    /// Members in ascending vertex order.
    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        let n = self.n;
        self.bits.iter().enumerate().flat_map(move |(b, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(index_vertex(b * 64 + bit, n))
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.iter().collect()
    }

    fn checked_index(&self, v: i64) -> Result<usize> {
        let half = self.n as i64;
        if v < -half || v > half {
            return Err(Error::InvalidArgument(format!(
                "vertex {v} outside [-{}, {}]",
                self.n, self.n
            )));
        }
        Ok(vertex_index(v, self.n))
    }
}

fn check_same_width<G: Digraph>(a: &VertexSet, g: &G) -> Result<()> {
    if a.half_width() != g.half_width() {
        return Err(Error::InvalidArgument(format!(
            "set on [-{0}, {0}] does not match graph on [-{1}, {1}]",
            a.half_width(),
            g.half_width()
        )));
    }
    Ok(())
}

/// `N(A, G)`: every vertex reachable from `A` along one edge.
pub fn neighbors<G: Digraph>(a: &VertexSet, g: &G) -> Result<VertexSet> {
    check_same_width(a, g)?;
    let mut out = VertexSet::empty(a.half_width());
    for v in a.iter() {
        for &w in g.out_neighbors(v) {
            out.insert(w)?;
        }
    }
    Ok(out)
}

/// Boundary `N(A, G) \ A`.
pub fn boundary<G: Digraph>(a: &VertexSet, g: &G) -> Result<VertexSet> {
    check_same_width(a, g)?;
    let mut out = VertexSet::empty(a.half_width());
    for v in a.iter() {
        for &w in g.out_neighbors(v) {
            if !a.contains(w) {
                out.insert(w)?;
            }
        }
    }
    Ok(out)
}

/// Number of directed edges (with multiplicity) leaving `A`.
pub fn edges_out<G: Digraph>(a: &VertexSet, g: &G) -> Result<usize> {
    check_same_width(a, g)?;
    let mut count = 0;
    for v in a.iter() {
        for &w in g.out_neighbors(v) {
            if !a.contains(w) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `A +- 1 = {x - 1, x + 1 : x in A}` clipped to the interval. Depends only
/// on the set, not on any permutation.
pub fn plus_minus_one(a: &VertexSet) -> VertexSet {
    let half = a.half_width() as i64;
    let mut out = VertexSet::empty(a.half_width());
    for v in a.iter() {
        for w in [v - 1, v + 1] {
            if (-half..=half).contains(&w) {
                out.insert(w).expect("clipped to range");
            }
        }
    }
    out
}

/// Counts maximal step-2 runs among the even members and among the odd
/// members of `A`; returns `(k_even, k_odd)`.
pub fn component_counts(a: &VertexSet) -> (usize, usize) {
    let mut k_even = 0;
    let mut k_odd = 0;
    let mut prev_even: Option<i64> = None;
    let mut prev_odd: Option<i64> = None;
    for v in a.iter() {
        if v.rem_euclid(2) == 0 {
            if prev_even != Some(v - 2) {
                k_even += 1;
            }
            prev_even = Some(v);
        } else {
            if prev_odd != Some(v - 2) {
                k_odd += 1;
            }
            prev_odd = Some(v);
        }
    }
    (k_even, k_odd)
}

/// Writes the edge list as tab-separated `u v multiplicity` lines sorted by
/// `(u, v)`, preceded by a `# permwalk-digraph n=<n>` header.
pub fn write_edge_list<G: Digraph, W: Write>(g: &G, mut w: W) -> io::Result<()> {
    writeln!(w, "# permwalk-digraph n={}", g.half_width())?;
    let half = g.half_width() as i64;
    for u in -half..=half {
        let mut targets: Vec<i64> = g.out_neighbors(u).to_vec();
        targets.sort_unstable();
        let mut i = 0;
        while i < targets.len() {
            let v = targets[i];
            let mut m = 0;
            while i < targets.len() && targets[i] == v {
                m += 1;
                i += 1;
            }
            writeln!(w, "{u}\t{v}\t{m}")?;
        }
    }
    Ok(())
}
