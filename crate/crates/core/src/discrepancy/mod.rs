//! Sign-average functionals over a difference sequence.
//!
//! `signed_objective` is `E_i E_x sigma_i prod_{l<k} Z(x + l d_i)` for a sign
//! vector `Z` on the group and signs `sigma` on the sequence;
//! `cs_objective` is the bilinear form left after squaring away the first
//! factor of an odd-length progression. Everything here is exact: integer
//! sums, or `Ratio<i64>` once normalised.

mod conditions;
mod search;
mod symmetrization;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::counting::{progression_starts, DifferenceSequence, SubsetMask};
use crate::error::{Error, Result};
use crate::group::Group;

pub use conditions::{
    collision_count, collision_threshold, good_set_search, max_multiplicity,
    multiplicity_threshold, GoodSet,
};
pub use search::{
    max_over_subsets, max_over_z, multilinear_dominance, DominanceCheck, SearchMode, SignMax,
    EXACT_SIGN_LIMIT,
};
pub use symmetrization::{symmetrization_check, SymmetrizationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignDomain {
    /// `Z`, indexed by the group.
    Group,
    /// `sigma` over the whole sequence `[m]`.
    Sequence,
    /// `sigma` over the left block of a partition.
    Left,
    /// `tau` over the right block.
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignVector {
    entries: Vec<i8>,
    domain: SignDomain,
}

impl SignVector {
    pub fn new(entries: Vec<i8>, domain: SignDomain) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!("sign entry {bad} is not +-1")));
        }
        Ok(Self { entries, domain })
    }

    pub fn all_plus(n: usize, domain: SignDomain) -> Self {
        Self {
            entries: vec![1; n],
            domain,
        }
    }

    /// Entry `x` is `-1` iff bit `x` of `negatives` is set.
    pub fn from_negatives(n: usize, negatives: u64, domain: SignDomain) -> Self {
        assert!(n <= 64);
        let entries = (0..n)
            .map(|x| if negatives >> x & 1 == 1 { -1 } else { 1 })
            .collect();
        Self { entries, domain }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, domain: SignDomain, rng: &mut R) -> Self {
        let entries = (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        Self { entries, domain }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> i64 {
        self.entries[i] as i64
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn domain(&self) -> SignDomain {
        self.domain
    }

    pub fn negated(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|s| -s).collect(),
            domain: self.domain,
        }
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.entries[i] = -out.entries[i];
        out
    }
}

/// A split `[m] = L ⊎ R` of sequence positions (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexPartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl IndexPartition {
    pub fn new(m: usize, mut left: Vec<usize>, mut right: Vec<usize>) -> Result<Self> {
        left.sort_unstable();
        right.sort_unstable();
        let mut seen = vec![false; m];
        for &i in left.iter().chain(&right) {
            if i >= m || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "partition blocks must split [0, {m}) exactly (bad index {i})"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter(format!(
                "partition blocks do not cover [0, {m})"
            )));
        }
        Ok(Self { left, right })
    }

    /// Uniformly random split with `|L| = floor(m / 2)`.
    pub fn random_balanced<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut idx: Vec<usize> = (0..m).collect();
        idx.shuffle(rng);
        let (l, r) = idx.split_at(m / 2);
        Self::new(m, l.to_vec(), r.to_vec()).expect("shuffle is a permutation")
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn len(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn product_over(z: &SignVector, pts: impl Iterator<Item = usize>) -> i64 {
    pts.fold(1, |acc, y| acc * z.get(y))
}

fn check_lengths(ds: &DifferenceSequence, sigma: &SignVector, z: &SignVector) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::EmptyDifferences);
    }
    if sigma.len() != ds.len() {
        return Err(Error::InvalidParameter(format!(
            "sigma has {} entries for a sequence of length {}",
            sigma.len(),
            ds.len()
        )));
    }
    if z.len() != ds.group().modulus() {
        return Err(Error::InvalidParameter(format!(
            "Z has {} entries for Z/{}",
            z.len(),
            ds.group().modulus()
        )));
    }
    Ok(())
}

/// `sum_i sum_x sigma_i prod_{l<k} Z(x + l d_i)`, the unnormalised objective.
pub fn signed_objective_sum(
    ds: &DifferenceSequence,
    sigma: &SignVector,
    z: &SignVector,
    k: usize,
) -> Result<i64> {
    check_lengths(ds, sigma, z)?;
    let g = ds.group();
    let n = g.modulus();
    let mut total = 0i64;
    for (i, &d) in ds.entries().iter().enumerate() {
        let inner: i64 = (0..n)
            .map(|x| product_over(z, (0..k).map(|l| g.add(x, g.scale(l as i64, d)))))
            .sum();
        total += sigma.get(i) * inner;
    }
    Ok(total)
}

/// `E_i E_x sigma_i prod_{l<k} Z(x + l d_i)`, denominator `mN`.
pub fn signed_objective(
    ds: &DifferenceSequence,
    sigma: &SignVector,
    z: &SignVector,
    k: usize,
) -> Result<Ratio<i64>> {
    let s = signed_objective_sum(ds, sigma, z, k)?;
    Ok(Ratio::new(s, (ds.len() * ds.group().modulus()) as i64))
}

/// The same functional evaluated at the 0/1 indicator of `a`.
pub fn subset_objective(
    ds: &DifferenceSequence,
    sigma: &SignVector,
    a: &SubsetMask,
    k: usize,
) -> Result<Ratio<i64>> {
    if ds.is_empty() {
        return Err(Error::EmptyDifferences);
    }
    let s: i64 = ds
        .entries()
        .iter()
        .enumerate()
        .map(|(i, &d)| sigma.get(i) * progression_starts(a, d, k).len() as i64)
        .sum();
    Ok(Ratio::new(s, (ds.len() * a.universe()) as i64))
}

/// `prod_{l=1}^{2r} Z(x + l d)` for every `x`.
fn tail_products(g: &Group, z: &SignVector, d: usize, r: usize) -> Vec<i64> {
    (0..g.modulus())
        .map(|x| product_over(z, (1..=2 * r).map(|l| g.add(x, g.scale(l as i64, d)))))
        .collect()
}

/// `sum_{i in L, j in R} sum_x sigma_i tau_j prod_{l=1}^{2r} Z(x + l d_i) Z(x + l d_j)`.
///
/// `sigma` is indexed by position in `part.left()`, `tau` by position in
/// `part.right()`.
pub fn cs_objective(
    ds: &DifferenceSequence,
    sigma: &SignVector,
    tau: &SignVector,
    part: &IndexPartition,
    z: &SignVector,
    r: usize,
) -> Result<i64> {
    if part.len() != ds.len() {
        return Err(Error::InvalidParameter("partition does not match the sequence".into()));
    }
    if sigma.len() != part.left().len() || tau.len() != part.right().len() {
        return Err(Error::InvalidParameter("sign vectors do not match the partition blocks".into()));
    }
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let g = ds.group();
    let n = g.modulus();
    let mut left_sum = vec![0i64; n];
    for (a, &i) in part.left().iter().enumerate() {
        for (x, p) in tail_products(g, z, ds.entries()[i], r).into_iter().enumerate() {
            left_sum[x] += sigma.get(a) * p;
        }
    }
    let mut right_sum = vec![0i64; n];
    for (b, &j) in part.right().iter().enumerate() {
        for (x, p) in tail_products(g, z, ds.entries()[j], r).into_iter().enumerate() {
            right_sum[x] += tau.get(b) * p;
        }
    }
    Ok(left_sum.iter().zip(&right_sum).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsCheck {
    /// `|E_i E_x sigma_i prod_{l<k} Z|^2`
    pub lhs: Ratio<i128>,
    /// `E_x E_{i,j} sigma_i sigma_j prod_{1<=l<k} Z(x + l d_i) Z(x + l d_j)`
    pub rhs: Ratio<i128>,
    pub holds: bool,
}

/// The pointwise Cauchy–Schwarz step. The right side is evaluated as the
/// literal double sum over `(i, j)`.
pub fn verify_cs_pointwise(
    ds: &DifferenceSequence,
    sigma: &SignVector,
    z: &SignVector,
    k: usize,
) -> Result<CsCheck> {
    let s = signed_objective_sum(ds, sigma, z, k)? as i128;
    let g = ds.group();
    let n = g.modulus() as i128;
    let m = ds.len() as i128;
    let tails: Vec<Vec<i64>> = ds
        .entries()
        .iter()
        .map(|&d| {
            (0..g.modulus())
                .map(|x| product_over(z, (1..k).map(|l| g.add(x, g.scale(l as i64, d)))))
                .collect()
        })
        .collect();
    let mut t = 0i128;
    for (i, ti) in tails.iter().enumerate() {
        for (j, tj) in tails.iter().enumerate() {
            let inner: i64 = ti.iter().zip(tj).map(|(a, b)| a * b).sum();
            t += (sigma.get(i) * sigma.get(j) * inner) as i128;
        }
    }
    let lhs = Ratio::new(s * s, (m * n) * (m * n));
    let rhs = Ratio::new(t, n * m * m);
    Ok(CsCheck {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, tag};

    fn ds(n: usize, d: &[usize]) -> DifferenceSequence {
        DifferenceSequence::new(Group::new(n).unwrap(), d.to_vec()).unwrap()
    }

    #[test]
    fn objective_examples() {
        let d = ds(5, &[1, 3]);
        let plus_m = SignVector::all_plus(2, SignDomain::Sequence);
        let plus_g = SignVector::all_plus(5, SignDomain::Group);
        assert_eq!(signed_objective(&d, &plus_m, &plus_g, 3).unwrap(), Ratio::from_integer(1));
        assert_eq!(
            signed_objective(&d, &plus_m, &plus_g.negated(), 3).unwrap(),
            Ratio::from_integer(-1)
        );
        let z = plus_g.flipped(0);
        let one = SignVector::all_plus(1, SignDomain::Sequence);
        assert_eq!(signed_objective(&ds(5, &[1]), &one, &z, 3).unwrap(), Ratio::new(-1, 5));
    }

    #[test]
    fn subset_objective_counts_progressions() {
        let g = Group::new(5).unwrap();
        let a = SubsetMask::from_elements(&g, [0, 1, 2]).unwrap();
        let sigma = SignVector::new(vec![1, -1], SignDomain::Sequence).unwrap();
        // d = 1: one progression (0,1,2); d = 0: three constant ones
        assert_eq!(subset_objective(&ds(5, &[1, 0]), &sigma, &a, 3).unwrap(), Ratio::new(1 - 3, 10));
    }

    // literal quadruple loop over (i, j, x, l)
    fn cs_oracle(
        d: &DifferenceSequence,
        sigma: &SignVector,
        tau: &SignVector,
        part: &IndexPartition,
        z: &SignVector,
        r: usize,
    ) -> i64 {
        let n = d.group().modulus();
        let mut total = 0;
        for (a, &i) in part.left().iter().enumerate() {
            for (b, &j) in part.right().iter().enumerate() {
                for x in 0..n {
                    let mut p = sigma.get(a) * tau.get(b);
                    for l in 1..=2 * r {
                        p *= z.get((x + l * d.entries()[i]) % n) * z.get((x + l * d.entries()[j]) % n);
                    }
                    total += p;
                }
            }
        }
        total
    }

    #[test]
    fn cs_objective_examples() {
        let d = ds(7, &[1, 2, 5]);
        let part = IndexPartition::new(3, vec![0, 2], vec![1]).unwrap();
        let s = SignVector::all_plus(2, SignDomain::Left);
        let t = SignVector::all_plus(1, SignDomain::Right);
        let z = SignVector::all_plus(7, SignDomain::Group);
        assert_eq!(cs_objective(&d, &s, &t, &part, &z, 1).unwrap(), 2 * 7);

        let mut rng = substream(11, tag::VERIFY, 0, 0);
        let d = ds(7, &[1, 2]);
        let part = IndexPartition::new(2, vec![0], vec![1]).unwrap();
        for _ in 0..50 {
            let z = SignVector::random(7, SignDomain::Group, &mut rng);
            let s = SignVector::random(1, SignDomain::Left, &mut rng);
            let t = SignVector::random(1, SignDomain::Right, &mut rng);
            assert_eq!(
                cs_objective(&d, &s, &t, &part, &z, 1).unwrap(),
                cs_oracle(&d, &s, &t, &part, &z, 1)
            );
        }
    }

    #[test]
    fn flipping_one_tau_moves_by_twice_its_partial_sum() {
        let mut rng = substream(12, tag::VERIFY, 0, 0);
        let d = ds(11, &[1, 3, 4, 9]);
        let part = IndexPartition::new(4, vec![0, 1], vec![2, 3]).unwrap();
        let z = SignVector::random(11, SignDomain::Group, &mut rng);
        let s = SignVector::random(2, SignDomain::Left, &mut rng);
        let t = SignVector::random(2, SignDomain::Right, &mut rng);
        let base = cs_objective(&d, &s, &t, &part, &z, 1).unwrap();
        // partial sum over j = right[0] alone: drop the other right index
        let sub = ds(11, &[1, 3, 4]);
        let sub_part = IndexPartition::new(3, vec![0, 1], vec![2]).unwrap();
        let t0 = SignVector::new(vec![t.entries()[0]], SignDomain::Right).unwrap();
        let partial = cs_objective(&sub, &s, &t0, &sub_part, &z, 1).unwrap();
        let flipped = cs_objective(&d, &s, &t.flipped(0), &part, &z, 1).unwrap();
        assert_eq!(base - flipped, 2 * partial);
    }

    #[test]
    fn cs_pointwise_examples() {
        let d = ds(7, &[1, 2, 4]);
        let sigma = SignVector::all_plus(3, SignDomain::Sequence);
        let z = SignVector::all_plus(7, SignDomain::Group);
        let c = verify_cs_pointwise(&d, &sigma, &z, 3).unwrap();
        assert!(c.holds && c.lhs == c.rhs && c.lhs == Ratio::from_integer(1));

        let mut rng = substream(13, tag::VERIFY, 0, 0);
        for _ in 0..20 {
            let z = SignVector::random(7, SignDomain::Group, &mut rng);
            let one = SignVector::random(1, SignDomain::Sequence, &mut rng);
            let c = verify_cs_pointwise(&ds(7, &[3]), &one, &z, 3).unwrap();
            assert!(c.holds);
            // with one term the right side is E_x of a square of signs
            assert_eq!(c.rhs, Ratio::from_integer(1));
        }
    }

    #[test]
    fn partition_validation() {
        assert!(IndexPartition::new(3, vec![0], vec![1]).is_err());
        assert!(IndexPartition::new(3, vec![0, 1], vec![1, 2]).is_err());
        let mut rng = substream(1, tag::VERIFY, 0, 0);
        let p = IndexPartition::random_balanced(7, &mut rng);
        assert_eq!((p.left().len(), p.right().len()), (3, 4));
    }
}
