//! Hypergraph polynomials, their derivative profiles, and the `X_i`
//! statistic that measures row weights of the grouped embedding matrices.

use std::collections::BTreeMap;
use std::io::Write;

use itertools::Itertools;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::DifferenceSequence;
use crate::error::{Error, Result};
use crate::group::{is_good_pair, single_support};
use crate::matrix::{choose, pairs_per_point};
use crate::rng::{child_seed, substream, tag};

/// Largest `C(n, t)` for which set averages are enumerated rather than sampled.
pub const EXACT_SET_LIMIT: u128 = 1_000_000;

/// `f(x) = sum_e prod_{v in e} x_v` over an edge multiset on `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypergraphPoly {
    n: usize,
    /// sorted edge -> multiplicity
    edges: BTreeMap<Vec<usize>, u64>,
}

impl HypergraphPoly {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeMap::new(),
        }
    }

    pub fn add_edge(&mut self, edge: &[usize], multiplicity: u64) -> Result<()> {
        let mut e = edge.to_vec();
        e.sort_unstable();
        e.dedup();
        if let Some(&v) = e.iter().find(|&&v| v >= self.n) {
            return Err(Error::InvalidParameter(format!("vertex {v} outside [0, {})", self.n)));
        }
        if multiplicity > 0 {
            *self.edges.entry(e).or_insert(0) += multiplicity;
        }
        Ok(())
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (&[usize], u64)> {
        self.edges.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    /// Edge count with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// One `multiplicity v1 v2 ...` line per distinct edge, sorted.
    pub fn write_dump<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (e, c) in &self.edges {
            write!(w, "{c}")?;
            for v in e {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn check_point(h: &HypergraphPoly, x: &[bool]) -> Result<()> {
    if x.len() != h.n {
        return Err(Error::InvalidParameter(format!(
            "point has {} coordinates for {} vertices",
            x.len(),
            h.n
        )));
    }
    Ok(())
}

pub fn poly_eval(h: &HypergraphPoly, x: &[bool]) -> Result<u64> {
    check_point(h, x)?;
    Ok(h.edges
        .iter()
        .filter(|(e, _)| e.iter().all(|&v| x[v]))
        .map(|(_, c)| c)
        .sum())
}

/// `f_A(x) = sum_{e ⊇ A} prod_{v in e \ A} x_v`
pub fn poly_eval_a(h: &HypergraphPoly, a: &[usize], x: &[bool]) -> Result<u64> {
    check_point(h, x)?;
    Ok(h.edges
        .iter()
        .filter(|(e, _)| a.iter().all(|v| e.contains(v)))
        .filter(|(e, _)| e.iter().all(|v| a.contains(v) || x[*v]))
        .map(|(_, c)| c)
        .sum())
}

/// For each `A` contained in some edge, `counts[j]` = number of edges
/// `e ⊇ A` with `|e \ A| = j`.
pub fn derivative_counts(h: &HypergraphPoly) -> BTreeMap<Vec<usize>, Vec<u64>> {
    let width = h.max_edge_size() + 1;
    let mut acc: BTreeMap<Vec<usize>, Vec<u64>> = BTreeMap::new();
    for (e, &c) in &h.edges {
        for a in e.iter().copied().powerset() {
            let j = e.len() - a.len();
            acc.entry(a).or_insert_with(|| vec![0; width])[j] += c;
        }
    }
    acc
}

/// `deg(A)`: number of edges containing `A`, with multiplicity.
pub fn degree(h: &HypergraphPoly, a: &[usize]) -> u64 {
    h.edges
        .iter()
        .filter(|(e, _)| a.iter().all(|v| e.contains(v)))
        .map(|(_, c)| c)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuProfile {
    /// `mu_i = max_{|A| = i} E f_A(X)`, `X ~ Bernoulli(p)^n`
    pub mu: Vec<Ratio<i128>>,
    pub mu_max: Ratio<i128>,
    /// `max_{i >= 1} mu_i`
    pub mu_prime: Ratio<i128>,
    pub p: Ratio<i128>,
}

pub fn mu_profile(h: &HypergraphPoly, p: Ratio<i128>) -> Result<MuProfile> {
    if !(p > Ratio::zero() && p < Ratio::one()) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1)")));
    }
    let width = h.max_edge_size() + 1;
    let powers: Vec<Ratio<i128>> = (0..width).map(|j| p.pow(j as i32)).collect();
    let mut mu = vec![Ratio::zero(); width];
    for (a, counts) in derivative_counts(h) {
        let e: Ratio<i128> = counts
            .iter()
            .zip(&powers)
            .map(|(&c, q)| q * c as i128)
            .sum();
        if e > mu[a.len()] {
            mu[a.len()] = e;
        }
    }
    let mu_max = mu.iter().copied().max().unwrap_or_else(Ratio::zero);
    let mu_prime = mu.iter().skip(1).copied().max().unwrap_or_else(Ratio::zero);
    Ok(MuProfile {
        mu,
        mu_max,
        mu_prime,
        p,
    })
}

/// Edges `S1 ∪ S2` with `S1 ∈ C(P_i(x), r)`, `S2 ∈ C(P_j(x), r)` for every
/// `x` and every `j` in `right` forming a good pair with `i`.
pub fn build_hi(ds: &DifferenceSequence, i: usize, right: &[usize], r: usize) -> Result<HypergraphPoly> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let g = ds.group();
    let di = ds.entries()[i];
    let mut h = HypergraphPoly::new(g.modulus());
    for &j in right {
        let dj = ds.entries()[j];
        if !is_good_pair(g, di, dj, r) {
            continue;
        }
        for x in g.elements() {
            let pi = single_support(g, x, di, r);
            let pj = single_support(g, x, dj, r);
            for s1 in pi.iter().copied().combinations(r) {
                for s2 in pj.iter().copied().combinations(r) {
                    let e: Vec<usize> = s1.iter().chain(&s2).copied().collect();
                    h.add_edge(&e, 1)?;
                }
            }
        }
    }
    Ok(h)
}

/// `X_i(U) = sum_{good j in R} sum_x 1{|U ∩ P_i(x)| = |U ∩ P_j(x)| = r}`.
///
/// Agrees with `poly_eval(build_hi(..), 1_U)` when `|U| <= 2r`; for larger
/// `U` the polynomial counts `C(|U ∩ P_i|, r) C(|U ∩ P_j|, r)` per point and
/// is an upper bound.
pub fn xi_value(ds: &DifferenceSequence, i: usize, right: &[usize], r: usize, u: &[usize]) -> u64 {
    let g = ds.group();
    let di = ds.entries()[i];
    let mut inside = vec![false; g.modulus()];
    u.iter().for_each(|&y| inside[y] = true);
    let hits = |p: &std::collections::BTreeSet<usize>| p.iter().filter(|&&y| inside[y]).count();
    right
        .iter()
        .filter(|&&j| is_good_pair(g, di, ds.entries()[j], r))
        .map(|&j| {
            g.elements()
                .filter(|&x| {
                    hits(&single_support(g, x, di, r)) == r
                        && hits(&single_support(g, x, ds.entries()[j], r)) == r
                })
                .count() as u64
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiSample {
    pub subset: Vec<usize>,
    pub value: u64,
}

/// `X_i` at a uniformly random `s`-subset.
pub fn sample_xi<R: Rng + ?Sized>(
    ds: &DifferenceSequence,
    i: usize,
    right: &[usize],
    s: usize,
    r: usize,
    rng: &mut R,
) -> Result<XiSample> {
    let n = ds.group().modulus();
    if s > n {
        return Err(Error::InvalidParameter(format!("s = {s} exceeds N = {n}")));
    }
    let mut subset = sample(rng, n, s).into_vec();
    subset.sort_unstable();
    let value = xi_value(ds, i, right, r, &subset);
    Ok(XiSample { subset, value })
}

fn good_count(ds: &DifferenceSequence, i: usize, right: &[usize], r: usize) -> usize {
    let g = ds.group();
    right
        .iter()
        .filter(|&&j| is_good_pair(g, ds.entries()[i], ds.entries()[j], r))
        .count()
}

/// `C(2r,r)^2 C(N-4r, s-2r) N #good / C(N, s)`
pub fn xi_mean_closed_form(ds: &DifferenceSequence, i: usize, right: &[usize], s: usize, r: usize) -> Ratio<i128> {
    let n = ds.group().modulus();
    let num = pairs_per_point(n, s, r) as i128 * n as i128 * good_count(ds, i, right, r) as i128;
    Ratio::new(num, choose(n, s) as i128)
}

/// Mean of `X_i` over every `s`-subset.
pub fn xi_mean_exact(ds: &DifferenceSequence, i: usize, right: &[usize], s: usize, r: usize) -> Result<Ratio<i128>> {
    let n = ds.group().modulus();
    let total = choose(n, s);
    if total > EXACT_SET_LIMIT {
        return Err(Error::EnumerationLimit {
            what: "C(N, s) for exact X_i mean",
            got: total.min(usize::MAX as u128) as usize,
            limit: EXACT_SET_LIMIT as usize,
        });
    }
    let sum: u64 = (0..n).combinations(s).map(|u| xi_value(ds, i, right, r, &u)).sum();
    Ok(Ratio::new(sum as i128, total as i128))
}

/// `E_{X ~ Bernoulli(p)} f(X) = sum_e p^{|e|}`
pub fn bernoulli_mean(h: &HypergraphPoly, p: Ratio<i128>) -> Ratio<i128> {
    h.edges().map(|(e, c)| p.pow(e.len() as i32) * c as i128).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetVsBernoulli {
    pub t: usize,
    pub p: Ratio<i128>,
    /// `E_{S in C([n], t)} f(1_S)`, exact when enumerated.
    pub set_mean: f64,
    pub set_mean_exact: Option<Ratio<i128>>,
    pub set_trials: usize,
    pub bernoulli_mean: Ratio<i128>,
    /// `E_S f <= 2 E_X f`
    pub holds: bool,
}

fn indicator(n: usize, s: &[usize]) -> Vec<bool> {
    let mut x = vec![false; n];
    s.iter().for_each(|&v| x[v] = true);
    x
}

/// Compares the uniform `t`-set average of `f` with twice its Bernoulli(`p`)
/// mean. Requires `16/n < p < 1` and `t <= pn/2`. The set side is
/// enumerated when `C(n, t) <= 10^6` and sampled with `trials` draws
/// otherwise.
pub fn verify_set_vs_bernoulli<R: Rng + ?Sized>(
    h: &HypergraphPoly,
    t: usize,
    p: Ratio<i128>,
    trials: usize,
    rng: &mut R,
) -> Result<SetVsBernoulli> {
    let n = h.vertices();
    if p >= Ratio::one() {
        return Err(Error::Precondition(format!("p = {p} must be below 1")));
    }
    if p * n as i128 <= Ratio::from_integer(16) {
        return Err(Error::Precondition(format!("p = {p} must exceed 16/n = 16/{n}")));
    }
    if Ratio::from_integer(2 * t as i128) > p * n as i128 {
        return Err(Error::Precondition(format!("t = {t} must be at most pn/2 = {}", p * n as i128 / 2)));
    }
    let bern = bernoulli_mean(h, p);
    let total = choose(n, t);
    let (set_mean, set_mean_exact, set_trials, holds) = if total <= EXACT_SET_LIMIT {
        let mut sum = 0u64;
        for s in (0..n).combinations(t) {
            sum += poly_eval(h, &indicator(n, &s))?;
        }
        let exact = Ratio::new(sum as i128, total as i128);
        let holds = exact <= bern * 2;
        (exact.to_f64().unwrap_or(f64::NAN), Some(exact), total as usize, holds)
    } else {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive when sampling".into()));
        }
        let seed = child_seed(rng);
        let sum: u64 = (0..trials)
            .into_par_iter()
            .map(|k| {
                let mut local = substream(seed, tag::KIMVU, 1, k as u64);
                let s = sample(&mut local, n, t).into_vec();
                poly_eval(h, &indicator(n, &s)).expect("indicator has n coordinates")
            })
            .sum();
        let mean = sum as f64 / trials as f64;
        let rhs = 2.0 * bern.to_f64().unwrap_or(f64::INFINITY);
        (mean, None, trials, mean <= rhs)
    };
    Ok(SetVsBernoulli {
        t,
        p,
        set_mean,
        set_mean_exact,
        set_trials,
        bernoulli_mean: bern,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailProbe {
    pub t: usize,
    pub c_factor: f64,
    /// `c (ln n)^{k - 1/2} mu` with `k` the largest edge size
    pub threshold: f64,
    pub trials: usize,
    pub exceed: usize,
    pub fraction: f64,
}

/// Empirical `Pr_S[f(1_S) >= c (ln n)^{k-1/2} mu]` over uniform `t`-sets.
pub fn tail_probe<R: Rng + ?Sized>(
    h: &HypergraphPoly,
    t: usize,
    p: Ratio<i128>,
    c_factor: f64,
    trials: usize,
    rng: &mut R,
) -> Result<TailProbe> {
    let n = h.vertices();
    if t > n {
        return Err(Error::InvalidParameter(format!("t = {t} exceeds n = {n}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let profile = mu_profile(h, p)?;
    let k = h.max_edge_size() as f64;
    let threshold = c_factor * (n as f64).ln().powf(k - 0.5) * profile.mu_max.to_f64().unwrap_or(f64::NAN);
    let seed = child_seed(rng);
    let exceed = (0..trials)
        .into_par_iter()
        .filter(|&k| {
            let mut local = substream(seed, tag::KIMVU, 2, k as u64);
            let s = sample(&mut local, n, t).into_vec();
            poly_eval(h, &indicator(n, &s)).expect("indicator has n coordinates") as f64 >= threshold
        })
        .count();
    Ok(TailProbe {
        t,
        c_factor,
        threshold,
        trials,
        exceed,
        fraction: exceed as f64 / trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn ds(n: usize, d: &[usize]) -> DifferenceSequence {
        DifferenceSequence::new(Group::new(n).unwrap(), d.to_vec()).unwrap()
    }

    fn poly(n: usize, edges: &[&[usize]]) -> HypergraphPoly {
        let mut h = HypergraphPoly::new(n);
        for e in edges {
            h.add_edge(e, 1).unwrap();
        }
        h
    }

    #[test]
    fn eval_examples() {
        assert_eq!(poly_eval(&HypergraphPoly::new(3), &[true; 3]).unwrap(), 0);
        assert_eq!(poly_eval(&poly(1, &[&[0]]), &[true]).unwrap(), 1);
        let h = poly(3, &[&[0, 1], &[0, 2], &[0, 1]]);
        assert_eq!(poly_eval(&h, &[true, true, false]).unwrap(), 2);
        assert!(poly_eval(&h, &[true]).is_err());
    }

    #[test]
    fn eval_a_examples() {
        let single = poly(3, &[&[0, 2]]);
        assert_eq!(poly_eval_a(&single, &[0, 2], &[false; 3]).unwrap(), 1);
        assert_eq!(poly_eval_a(&single, &[1], &[true; 3]).unwrap(), 0);
        let h = poly(3, &[&[0, 1], &[0, 2]]);
        assert_eq!(poly_eval_a(&h, &[0], &[false, true, false]).unwrap(), 1);
        assert_eq!(poly_eval_a(&h, &[], &[true, true, false]).unwrap(), 1);
    }

    #[test]
    fn mu_examples() {
        let half = Ratio::new(1, 2);
        let p = Ratio::new(1, 3);
        let m = mu_profile(&poly(2, &[&[1]]), p).unwrap();
        assert_eq!(m.mu, vec![p, Ratio::one()]);
        let m = mu_profile(&HypergraphPoly::new(4), p).unwrap();
        assert!(m.mu.iter().all(|v| v.is_zero()));
        let m = mu_profile(&poly(3, &[&[0, 1], &[0, 2]]), half).unwrap();
        assert_eq!(m.mu, vec![half, Ratio::one(), Ratio::one()]);
        assert_eq!((m.mu_max, m.mu_prime), (Ratio::one(), Ratio::one()));
        assert!(mu_profile(&HypergraphPoly::new(2), Ratio::one()).is_err());
    }

    #[test]
    fn hi_examples() {
        let d = ds(11, &[1, 3]);
        let h = build_hi(&d, 0, &[1], 1).unwrap();
        assert_eq!(h.edge_count(), 44);
        assert!(h.edges().all(|(e, _)| e.len() == 2));
        assert!(build_hi(&ds(11, &[2, 2]), 0, &[1], 1).unwrap().is_empty());
    }

    #[test]
    fn xi_matches_polynomial() {
        let d = ds(11, &[1, 3, 4, 7]);
        let right = [1, 2, 3];
        let h = build_hi(&d, 0, &right, 1).unwrap();
        for s in 0..=5 {
            for u in (0..11).combinations(s) {
                let x = xi_value(&d, 0, &right, 1, &u);
                let f = poly_eval(&h, &indicator(11, &u)).unwrap();
                // above 2r points, f also counts U meeting a support in more than r points
                if s <= 2 {
                    assert_eq!(x, f);
                } else {
                    assert!(x <= f);
                }
            }
        }
    }

    #[test]
    fn xi_trivia_and_mean() {
        let d = ds(11, &[1, 3]);
        let mut rng = substream(1, tag::KIMVU, 0, 0);
        assert_eq!(sample_xi(&d, 0, &[], 2, 1, &mut rng).unwrap().value, 0);
        assert_eq!(sample_xi(&d, 0, &[1], 0, 1, &mut rng).unwrap().value, 0);
        assert_eq!(xi_mean_exact(&d, 0, &[1], 2, 1).unwrap(), xi_mean_closed_form(&d, 0, &[1], 2, 1));
        assert_eq!(xi_mean_closed_form(&d, 0, &[1], 2, 1), Ratio::new(44, 55));
    }

    #[test]
    fn degeneracy_of_uniform_profile() {
        let d = ds(13, &[1, 3, 4, 6]);
        let h = build_hi(&d, 0, &[1, 2, 3], 1).unwrap();
        let (s, n) = (3i128, 13i128);
        let p = Ratio::new(s, n);
        let profile = mu_profile(&h, p).unwrap();
        for l in 0..=2usize {
            let best = (0..13usize)
                .combinations(l)
                .map(|a| p.pow(2 - l as i32) * degree(&h, &a) as i128)
                .max()
                .unwrap();
            assert_eq!(profile.mu[l], best);
        }
    }

    #[test]
    fn set_vs_bernoulli_examples() {
        let mut rng = substream(2, tag::KIMVU, 0, 0);
        let p = Ratio::new(9, 10);
        let empty = HypergraphPoly::new(20);
        let r = verify_set_vs_bernoulli(&empty, 9, p, 100, &mut rng).unwrap();
        assert!(r.holds && r.set_mean == 0.0);
        let single = poly(20, &[&[5]]);
        let r = verify_set_vs_bernoulli(&single, 9, p, 100, &mut rng).unwrap();
        assert_eq!(r.set_mean_exact, Some(Ratio::new(9, 20)));
        assert_eq!(r.bernoulli_mean, p);
        assert!(r.holds);
        assert!(matches!(
            verify_set_vs_bernoulli(&single, 2, Ratio::new(1, 4), 100, &mut rng),
            Err(Error::Precondition(_))
        ));
        assert!(verify_set_vs_bernoulli(&single, 10, p, 100, &mut rng).is_err());
        // sampled branch: C(40, 10) is too large to enumerate
        let wide = poly(40, &[&[5]]);
        let r = verify_set_vs_bernoulli(&wide, 10, Ratio::new(1, 2), 2000, &mut rng).unwrap();
        assert!(r.set_mean_exact.is_none() && r.holds);
        assert!((r.set_mean - 0.25).abs() < 0.05);
    }

    #[test]
    fn tail_examples() {
        let mut rng = substream(3, tag::KIMVU, 0, 0);
        let d = ds(31, &[1, 5, 9, 14]);
        let h = build_hi(&d, 0, &[1, 2, 3], 1).unwrap();
        let p = Ratio::new(3, 31);
        assert_eq!(tail_probe(&h, 3, p, 1e9, 200, &mut rng).unwrap().fraction, 0.0);
        assert_eq!(tail_probe(&h, 3, p, 0.0, 200, &mut rng).unwrap().fraction, 1.0);
        let seed = child_seed(&mut rng);
        let mut last = 1.0;
        for c in [0.0, 0.01, 0.05, 0.1, 0.5, 1.0] {
            let mut local = substream(seed, tag::KIMVU, 0, 0);
            let f = tail_probe(&h, 3, p, c, 500, &mut local).unwrap().fraction;
            assert!(f <= last);
            last = f;
        }
    }

    #[test]
    fn dump() {
        let h = poly(4, &[&[2, 1], &[0, 3], &[1, 2]]);
        let mut out = Vec::new();
        h.write_dump(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1 0 3\n2 1 2\n");
    }
}
