//! Permuted random walks on the integer interval `[-n, n]`.
//!
//! A permutation `sigma` of `[-n, n]` composed with one step of the
//! interval walk (self loops at the endpoints) defines a Markov chain whose
//! transition digraph is 2-in/2-out regular, Eulerian, and strongly
//! connected for every `sigma`. This crate builds those digraphs, computes
//! their exact hitting times, bottleneck ratios, and mixing behavior, and
//! runs reproducible statistical experiments over uniformly sampled
//! permutations:
//!
//! - [`perm`]: permutations of `[-n, n]`, uniform sampling, shift fixed
//!   points.
//! - [`digraph`]: the walk digraph and its square, connectivity, boundary
//!   and interval combinatorics.
//! - [`expansion`]: bottleneck ratios, exhaustive and heuristic minimum
//!   search, binomial counting bounds.
//! - [`markov`]: transition kernels, exact hitting-time solvers, Green's
//!   functions, mixing traces.
//! - [`montecarlo`]: seeded trajectory simulation cross-validating the
//!   exact solvers.
//! - [`experiments`]: the statistical experiment harness and CLI.

pub mod digraph;
pub mod error;
pub mod expansion;
pub mod experiments;
pub mod markov;
pub mod montecarlo;
pub mod perm;
pub mod rng;

pub use digraph::{PermutedDigraph, SquareDigraph, VertexSet};
pub use error::{Error, Result};
pub use expansion::BottleneckWitness;
pub use markov::{HittingTable, MixingProfile, TransitionKernel, WalkMode};
pub use perm::Permutation;
pub use rng::RngSeed;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
