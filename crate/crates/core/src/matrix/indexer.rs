use num_integer::binomial;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Colexicographic ranking of the `s`-subsets of `[0, n)`.
///
/// The rank of `{c_1 < ... < c_s}` is `sum_i C(c_i, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetIndexer {
    n: usize,
    s: usize,
    total: usize,
}

/// `C(n, k)` in `u128`, zero when `k > n`.
pub fn choose(n: usize, k: usize) -> u128 {
    if k > n {
        0
    } else {
        binomial(n as u128, k as u128)
    }
}

impl SubsetIndexer {
    /// Fails when `C(n, s)` exceeds `cap`.
    pub fn new(n: usize, s: usize, cap: usize) -> Result<Self> {
        if s > n {
            return Err(Error::InvalidParameter(format!("subset size {s} exceeds ground set {n}")));
        }
        let total = choose(n, s);
        if total > cap as u128 {
            return Err(Error::DimensionCapExceeded { dim: total, cap });
        }
        Ok(Self {
            n,
            s,
            total: total as usize,
        })
    }

    pub fn ground(&self) -> usize {
        self.n
    }

    pub fn subset_size(&self) -> usize {
        self.s
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Rank of a strictly increasing subset.
    pub fn rank(&self, subset: &[usize]) -> usize {
        debug_assert_eq!(subset.len(), self.s);
        debug_assert!(subset.windows(2).all(|w| w[0] < w[1]));
        subset
            .iter()
            .enumerate()
            .map(|(i, &c)| choose(c, i + 1) as usize)
            .sum()
    }

    pub fn unrank(&self, mut rank: usize) -> Vec<usize> {
        assert!(rank < self.total, "rank {rank} out of range");
        let mut out = vec![0; self.s];
        let mut c = self.n;
        for i in (1..=self.s).rev() {
            c -= 1;
            while choose(c, i) as usize > rank {
                c -= 1;
            }
            out[i - 1] = c;
            rank -= choose(c, i) as usize;
        }
        out
    }
}
