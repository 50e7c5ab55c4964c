//! Exact counts of k-term progressions inside subsets of Z/N.
//!
//! All values are carried as integer numerators over explicit denominators so
//! that identities between them can be checked bit-exactly.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::Group;

const WORD: usize = 64;

/// Membership vector of a subset of Z/N, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    n: usize,
    words: Vec<u64>,
    cardinality: usize,
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl SubsetMask {
    pub fn empty(g: &Group) -> Self {
        let n = g.modulus();
        Self {
            n,
            words: vec![0; n.div_ceil(WORD)],
            cardinality: 0,
        }
    }

    pub fn full(g: &Group) -> Self {
        let mut m = Self::empty(g);
        for w in m.words.iter_mut() {
            *w = !0;
        }
        m.clear_tail();
        m.cardinality = m.n;
        m
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(g: &Group, elems: I) -> Result<Self> {
        let mut m = Self::empty(g);
        for e in elems {
            if e >= m.n {
                return Err(Error::InvalidParameter(format!(
                    "element {e} outside Z/{}",
                    m.n
                )));
            }
            m.insert(e);
        }
        Ok(m)
    }

    /// Builds a mask from a bit pattern: element `x` is present iff bit `x` of `bits` is set.
    pub fn from_bits(g: &Group, bits: u64) -> Self {
        assert!(g.modulus() <= WORD);
        let mut m = Self::empty(g);
        if m.n > 0 {
            m.words[0] = bits;
            m.clear_tail();
            m.recount();
        }
        m
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cardinality
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cardinality == 0
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        x < self.n && self.words[x / WORD] >> (x % WORD) & 1 == 1
    }

    pub fn insert(&mut self, x: usize) -> bool {
        assert!(x < self.n);
        let was = self.contains(x);
        if !was {
            self.words[x / WORD] |= 1 << (x % WORD);
            self.cardinality += 1;
        }
        !was
    }

    pub fn remove(&mut self, x: usize) -> bool {
        assert!(x < self.n);
        let was = self.contains(x);
        if was {
            self.words[x / WORD] &= !(1 << (x % WORD));
            self.cardinality -= 1;
        }
        was
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.n == other.n
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    /// `{ y : y + c in self }`, i.e. the set translated by `-c`.
    pub fn pulled_back(&self, c: usize) -> Self {
        let c = c % self.n.max(1);
        if c == 0 {
            return self.clone();
        }
        // bit x of the result is bit (x + c) mod n of self
        let lo = shr(&self.words, c);
        let hi = shl(&self.words, self.n - c, self.words.len());
        let mut words: Vec<u64> = lo.iter().zip(&hi).map(|(a, b)| a | b).collect();
        mask_tail(&mut words, self.n);
        Self {
            n: self.n,
            words,
            cardinality: self.cardinality,
        }
    }

    /// `self + c`.
    pub fn translate(&self, c: usize) -> Self {
        let c = c % self.n.max(1);
        self.pulled_back((self.n - c) % self.n.max(1))
    }

    pub fn intersect_with(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        self.recount();
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    fn clear_tail(&mut self) {
        mask_tail(&mut self.words, self.n);
    }

    fn recount(&mut self) {
        self.cardinality = self.words.iter().map(|w| w.count_ones() as usize).sum();
    }
}

fn mask_tail(words: &mut [u64], n: usize) {
    let rem = n % WORD;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

fn shr(words: &[u64], s: usize) -> Vec<u64> {
    let (ws, bs) = (s / WORD, s % WORD);
    let len = words.len();
    (0..len)
        .map(|i| {
            let a = words.get(i + ws).copied().unwrap_or(0);
            let b = words.get(i + ws + 1).copied().unwrap_or(0);
            if bs == 0 {
                a
            } else {
                (a >> bs) | (b << (WORD - bs))
            }
        })
        .collect()
}

fn shl(words: &[u64], s: usize, len: usize) -> Vec<u64> {
    let (ws, bs) = (s / WORD, s % WORD);
    (0..len)
        .map(|i| {
            if i < ws {
                return 0;
            }
            let a = words.get(i - ws).copied().unwrap_or(0);
            let b = if i > ws {
                words.get(i - ws - 1).copied().unwrap_or(0)
            } else {
                0
            };
            if bs == 0 {
                a
            } else {
                (a << bs) | (b >> (WORD - bs))
            }
        })
        .collect()
}

/// An ordered difference sequence `D = (d_1, ..., d_m)` over Z/N.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DifferenceSequence {
    group: Group,
    entries: Vec<usize>,
}

impl DifferenceSequence {
    pub fn new(group: Group, entries: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&d| d >= group.modulus()) {
            return Err(Error::InvalidParameter(format!(
                "difference {bad} outside Z/{}",
                group.modulus()
            )));
        }
        Ok(Self { group, entries })
    }

    #[inline]
    pub fn group(&self) -> &Group {
        &self.group
    }

    #[inline]
    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn appended(&self, more: &[usize]) -> Result<Self> {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(more);
        Self::new(self.group, entries)
    }

    /// Distinct entries in increasing order.
    pub fn distinct(&self) -> Vec<usize> {
        let mut v = self.entries.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Every sequence in `G^m`, in lexicographic order.
pub fn all_sequences(g: Group, m: usize) -> impl Iterator<Item = DifferenceSequence> {
    let n = g.modulus();
    let total = (n as u128).pow(m as u32);
    (0..total).map(move |mut idx| {
        let mut entries = vec![0; m];
        for slot in entries.iter_mut().rev() {
            *slot = (idx % n as u128) as usize;
            idx /= n as u128;
        }
        DifferenceSequence { group: g, entries }
    })
}

/// Exact non-negative rational `numerator / denominator`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RationalCount {
    pub numerator: u64,
    pub denominator: u64,
}

impl RationalCount {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0, "zero denominator");
        Self {
            numerator,
            denominator,
        }
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn to_ratio(&self) -> Ratio<i128> {
        Ratio::new(self.numerator as i128, self.denominator as i128)
    }
}

impl PartialEq for RationalCount {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RationalCount {}

impl PartialOrd for RationalCount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalCount {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.numerator as u128 * other.denominator as u128;
        let b = other.numerator as u128 * self.denominator as u128;
        a.cmp(&b)
    }
}

/// Starting points `x` whose whole progression `x, x+d, ..., x+(k-1)d` lies in `a`.
pub fn progression_starts(a: &SubsetMask, d: usize, k: usize) -> SubsetMask {
    let n = a.universe();
    let mut acc = a.clone();
    let mut shift = 0usize;
    for _ in 1..k {
        shift = (shift + d) % n;
        acc.intersect_with(&a.pulled_back(shift));
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// `Lambda_d(A) = E_x prod_l A(x + l d)`, as a count over `N`.
pub fn lambda_single(a: &SubsetMask, d: usize, k: usize) -> RationalCount {
    let count = progression_starts(a, d, k).len();
    RationalCount::new(count as u64, a.universe() as u64)
}

/// `Lambda_D(A)`: average of `Lambda_{d_i}(A)` over the sequence, denominator `mN`.
pub fn lambda_d(a: &SubsetMask, ds: &DifferenceSequence, k: usize) -> Result<RationalCount> {
    if ds.is_empty() {
        return Err(Error::EmptyDifferences);
    }
    let num: u64 = ds
        .entries()
        .iter()
        .map(|&d| lambda_single(a, d, k).numerator)
        .sum();
    Ok(RationalCount::new(
        num,
        (ds.len() * a.universe()) as u64,
    ))
}

/// `Lambda_G(A)`: fraction of all `N^2` pairs `(x, d)` whose progression lies in `A`.
pub fn lambda_g(a: &SubsetMask, k: usize) -> RationalCount {
    let n = a.universe();
    let num: u64 = (0..n).map(|d| lambda_single(a, d, k).numerator).sum();
    RationalCount::new(num, (n * n) as u64)
}

/// First `(x, d_i)` in `(i, x)` order whose progression lies in `A`.
pub fn find_witness(a: &SubsetMask, ds: &DifferenceSequence, k: usize) -> Option<(usize, usize)> {
    ds.entries()
        .iter()
        .find_map(|&d| progression_starts(a, d, k).first().map(|x| (x, d)))
}
