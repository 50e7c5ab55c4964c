//! Arithmetic in the cyclic group Z/N and the progression supports built on it.
//!
//! Elements are always canonical residues in `[0, N)`.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest progression length accepted anywhere in the crate. `(k-1)!` stays
/// far inside `u64` at this size.
pub const MAX_K: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Group {
    modulus: usize,
}

impl Group {
    pub fn new(modulus: usize) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidParameter("modulus must be at least 1".into()));
        }
        Ok(Self { modulus })
    }

    #[inline]
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    #[inline]
    pub fn reduce(&self, v: i64) -> usize {
        v.rem_euclid(self.modulus as i64) as usize
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.modulus && b < self.modulus);
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// `l * d mod N` for a signed multiplier.
    #[inline]
    pub fn scale(&self, l: i64, d: usize) -> usize {
        let n = self.modulus as i128;
        ((l as i128 * d as i128).rem_euclid(n)) as usize
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.modulus
    }

    pub fn contains(&self, a: usize) -> bool {
        a < self.modulus
    }
}

/// Progression length `k` and density `epsilon`.
///
/// `k = 2` is accepted so the 1-intersective (pair) case can be estimated;
/// the odd-length machinery asks for [`ApParams::half_length`] which rejects
/// even `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApParams {
    k: usize,
    epsilon: f64,
}

impl ApParams {
    pub fn new(k: usize, epsilon: f64) -> Result<Self> {
        if !(2..=MAX_K).contains(&k) {
            return Err(Error::InvalidParameter(format!(
                "progression length k must lie in [2, {MAX_K}], got {k}"
            )));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "density epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        Ok(Self { k, epsilon })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Intersectivity degree `t = k - 1`.
    #[inline]
    pub fn t(&self) -> usize {
        self.k - 1
    }

    /// `r` with `k = 2r + 1`; only defined for odd `k`.
    pub fn half_length(&self) -> Result<usize> {
        half_length(self.k)
    }

    /// Smallest admissible witness size `ceil(epsilon * N)`.
    pub fn density_target(&self, g: &Group) -> usize {
        density_target(self.epsilon, g.modulus())
    }
}

pub fn half_length(k: usize) -> Result<usize> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "odd progression length k = 2r + 1 >= 3 required, got {k}"
        )));
    }
    Ok((k - 1) / 2)
}

/// `ceil(epsilon * n)`, with a small guard so that e.g. `0.6 * 5` is 3 and not 4.
pub fn density_target(epsilon: f64, n: usize) -> usize {
    let raw = epsilon * n as f64;
    let rounded = raw.round();
    if (raw - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

pub fn factorial(n: usize) -> u64 {
    assert!(n <= MAX_K, "factorial argument {n} above cap {MAX_K}");
    (1..=n as u64).product()
}

/// Whether `gcd(N, (k-1)!) = 1`.
pub fn check_coprime(g: &Group, params: &ApParams) -> bool {
    coprime_to_factorial(g.modulus(), params.k())
}

pub fn coprime_to_factorial(modulus: usize, k: usize) -> bool {
    let f = factorial(k.saturating_sub(1));
    (modulus as u64).gcd(&f) == 1
}

/// `[x, x + d, ..., x + (k-1)d]`, multiplicity preserved.
pub fn progression_support(g: &Group, x: usize, d: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut cur = x % g.modulus();
    let d = d % g.modulus();
    for _ in 0..k {
        out.push(cur);
        cur = g.add(cur, d);
    }
    out
}

/// The supports `P_i(x) = {x + l d_i : 1 <= l <= 2r}`, `P_j(x)` and their union.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSupport {
    pub p_i: BTreeSet<usize>,
    pub p_j: BTreeSet<usize>,
    pub p_ij: BTreeSet<usize>,
}

pub fn single_support(g: &Group, x: usize, d: usize, r: usize) -> BTreeSet<usize> {
    (1..=2 * r as i64)
        .map(|l| g.add(x % g.modulus(), g.scale(l, d)))
        .collect()
}

pub fn pair_support(g: &Group, x: usize, d_i: usize, d_j: usize, r: usize) -> PairSupport {
    let p_i = single_support(g, x, d_i, r);
    let p_j = single_support(g, x, d_j, r);
    let p_ij = p_i.union(&p_j).copied().collect();
    PairSupport { p_i, p_j, p_ij }
}

/// A pair of differences is good when `|P_ij(0)| = 4r`, i.e. the two
/// supports are disjoint and free of internal collisions.
pub fn is_good_pair(g: &Group, d_i: usize, d_j: usize, r: usize) -> bool {
    pair_support(g, 0, d_i, d_j, r).p_ij.len() == 4 * r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn coprime_examples() {
        let p3 = ApParams::new(3, 0.5).unwrap();
        let p5 = ApParams::new(5, 0.5).unwrap();
        assert!(check_coprime(&Group::new(7).unwrap(), &p3));
        assert!(!check_coprime(&Group::new(6).unwrap(), &p3));
        // gcd(25, 24) = 1 by Euclid: 25 = 1*24 + 1.
        assert!(check_coprime(&Group::new(25).unwrap(), &p5));
        assert!(!check_coprime(&Group::new(15).unwrap(), &p5));
    }

    #[test]
    fn progression_examples() {
        let g7 = Group::new(7).unwrap();
        let g5 = Group::new(5).unwrap();
        assert_eq!(progression_support(&g7, 1, 2, 3), vec![1, 3, 5]);
        assert_eq!(progression_support(&g5, 0, 0, 3), vec![0, 0, 0]);
        assert_eq!(progression_support(&g5, 3, 4, 3), vec![3, 2, 1]);
    }

    #[test]
    fn pair_support_examples() {
        let g7 = Group::new(7).unwrap();
        let ps = pair_support(&g7, 0, 1, 2, 1);
        assert_eq!(ps.p_i, set(&[1, 2]));
        assert_eq!(ps.p_j, set(&[2, 4]));
        assert_eq!(ps.p_ij, set(&[1, 2, 4]));

        let g11 = Group::new(11).unwrap();
        let ps = pair_support(&g11, 0, 1, 3, 1);
        assert_eq!(ps.p_ij, set(&[1, 2, 3, 6]));
        assert!(is_good_pair(&g11, 1, 3, 1));

        let ps = pair_support(&g7, 0, 1, 1, 1);
        assert_eq!(ps.p_ij, set(&[1, 2]));
        assert!(!is_good_pair(&g7, 1, 1, 1));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(Group::new(0).is_err());
        assert!(ApParams::new(1, 0.5).is_err());
        assert!(ApParams::new(21, 0.5).is_err());
        assert!(ApParams::new(3, 0.0).is_err());
        assert!(ApParams::new(3, 1.5).is_err());
        assert!(ApParams::new(4, 0.5).unwrap().half_length().is_err());
        assert_eq!(ApParams::new(5, 0.5).unwrap().half_length().unwrap(), 2);
    }

    #[test]
    fn density_target_rounding() {
        assert_eq!(density_target(0.6, 5), 3);
        assert_eq!(density_target(0.4, 17), 7);
        assert_eq!(density_target(0.4, 127), 51);
        assert_eq!(density_target(1.0, 5), 5);
        assert_eq!(density_target(0.2, 5), 1);
    }
}
