//! Permutations of the integer interval `[-n, n]`.
//!
//! A permutation stores its image table in array order: entry `i` holds
//! `sigma(i - n)`. All public interfaces speak in `[-n, n]` coordinates;
//! the `v + n` index shift is an internal storage detail.

use crate::error::{Error, Result};
use crate::rng::RngSeed;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A bijection of `[-n, n]` onto itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PermutationJson", into = "PermutationJson")]
pub struct Permutation {
    n: usize,
    image: Vec<i64>,
}

/// Wire form: `{"n": n, "image": [sigma(-n), ..., sigma(n)]}`.
#[derive(Serialize, Deserialize)]
struct PermutationJson {
    n: usize,
    image: Vec<i64>,
}

impl TryFrom<PermutationJson> for Permutation {
    type Error = Error;

    fn try_from(raw: PermutationJson) -> Result<Permutation> {
        Permutation::from_image(raw.n, raw.image)
    }
}

impl From<Permutation> for PermutationJson {
    fn from(p: Permutation) -> PermutationJson {
        PermutationJson {
            n: p.n,
            image: p.image,
        }
    }
}

impl Permutation {
    /// The identity permutation on `[-n, n]`.
    pub fn identity(n: usize) -> Result<Permutation> {
        check_half_width(n)?;
        let half = n as i64;
        Ok(Permutation {
            n,
            image: (-half..=half).collect(),
        })
    }

    /// Draws a permutation uniformly from all `(2n+1)!` candidates via an
    /// unbiased Fisher-Yates shuffle on the given stream.
    pub fn sample_uniform(n: usize, seed: RngSeed) -> Result<Permutation> {
        check_half_width(n)?;
        let half = n as i64;
        let mut image: Vec<i64> = (-half..=half).collect();
        let mut rng = seed.rng();
        for i in (1..image.len()).rev() {
            let j = rng.random_range(0..=i);
            image.swap(i, j);
        }
        Ok(Permutation { n, image })
    }

    /// Builds a permutation from an explicit image table, validating that it
    /// is a bijection of `[-n, n]`.
    pub fn from_image(n: usize, image: Vec<i64>) -> Result<Permutation> {
        check_half_width(n)?;
        let len = 2 * n + 1;
        if image.len() != len {
            return Err(Error::InvalidArgument(format!(
                "image has {} entries, expected {}",
                image.len(),
                len
            )));
        }
        let half = n as i64;
        let mut seen = vec![false; len];
        for &v in &image {
            if v < -half || v > half {
                return Err(Error::InvalidArgument(format!(
                    "image value {v} outside [-{n}, {n}]"
                )));
            }
            let idx = (v + half) as usize;
            if seen[idx] {
                return Err(Error::InvalidArgument(format!(
                    "image value {v} appears more than once"
                )));
            }
            seen[idx] = true;
        }
        Ok(Permutation { n, image })
    }

    /// Half-width of the interval; the domain is `[-n, n]`.
    pub fn half_width(&self) -> usize {
        self.n
    }

    /// Number of points in the interval, `2n + 1`.
    pub fn interval_len(&self) -> usize {
        2 * self.n + 1
    }

    /// Image table in array order: entry `i` is `sigma(i - n)`.
    pub fn image(&self) -> &[i64] {
        &self.image
    }

    /// Evaluates `sigma(x)`.
    pub fn apply(&self, x: i64) -> Result<i64> {
        let half = self.n as i64;
        if x < -half || x > half {
            return Err(Error::InvalidArgument(format!(
                "point {x} outside [-{}, {}]",
                self.n, self.n
            )));
        }
        Ok(self.image[(x + half) as usize])
    }

    /// Evaluates `sigma(x)` without a range check; `x` must lie in `[-n, n]`.
    pub(crate) fn apply_unchecked(&self, x: i64) -> i64 {
        self.image[(x + self.n as i64) as usize]
    }

    /// The inverse bijection.
    pub fn inverse(&self) -> Permutation {
        let half = self.n as i64;
        let mut image = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            image[(v + half) as usize] = i as i64 - half;
        }
        Permutation { n: self.n, image }
    }

    /// Counts the shift fixed points `|{x in [-n, n-1] : sigma(x+1) = x}|`.
    ///
    /// Only `x <= n - 1` qualifies, since `sigma(x+1)` needs `x + 1` inside
    /// the interval. Each such point gives the walk a self-loop.
    pub fn shift_fixed_points(&self) -> usize {
        let half = self.n as i64;
        (-half..half)
            .filter(|&x| self.apply_unchecked(x + 1) == x)
            .count()
    }

    /// True if this is the identity.
    pub fn is_identity(&self) -> bool {
        let half = self.n as i64;
        self.image.iter().enumerate().all(|(i, &v)| v == i as i64 - half)
    }
}

fn check_half_width(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "half-width n must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Calls `f` once for every permutation of `[-n, n]`, in Heap's-algorithm
/// order. Used for exhaustive small-n verification; `(2n+1)!` grows fast,
/// so callers should keep `n <= 3`.
pub fn for_each_permutation<F: FnMut(&Permutation)>(n: usize, mut f: F) -> Result<()> {
    check_half_width(n)?;
    let half = n as i64;
    let len = 2 * n + 1;
    let mut image: Vec<i64> = (-half..=half).collect();
    let mut counters = vec![0usize; len];

    let mut emit = |image: &Vec<i64>| {
        f(&Permutation {
            n,
            image: image.clone(),
        })
    };
    emit(&image);
    let mut i = 0;
    while i < len {
        if counters[i] < i {
            if i % 2 == 0 {
                image.swap(0, i);
            } else {
                image.swap(counters[i], i);
            }
            emit(&image);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(())
}
