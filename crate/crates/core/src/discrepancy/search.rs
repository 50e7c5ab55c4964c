use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_lengths, SignDomain, SignVector};
use crate::counting::{DifferenceSequence, SubsetMask};
use crate::error::{Error, Result};
use crate::rng::{child_seed, substream, tag};

/// Largest modulus for which `max_over_z` and `max_over_subsets` enumerate.
pub const EXACT_SIGN_LIMIT: usize = 24;

const RESTARTS: usize = 32;
const FLIPS_PER_VERTEX: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignMax {
    /// `|objective|` at `z`, denominator `mN`.
    pub value: Ratio<i64>,
    pub z: SignVector,
    pub mode: SearchMode,
}

/// The objective as `sum_t c_t prod_{y in odd_t} Z(y)`, with terms sharing a
/// reduced monomial merged.
struct Monomials {
    coef: Vec<i64>,
    points: Vec<Vec<usize>>,
    /// `incident[y]` lists the monomials containing `y`.
    incident: Vec<Vec<usize>>,
}

impl Monomials {
    fn build(ds: &DifferenceSequence, sigma: &SignVector, k: usize) -> Self {
        let g = ds.group();
        let n = g.modulus();
        let mut merged: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for (i, &d) in ds.entries().iter().enumerate() {
            for x in 0..n {
                let mut parity = vec![false; n];
                for l in 0..k {
                    let y = g.add(x, g.scale(l as i64, d));
                    parity[y] = !parity[y];
                }
                let odd: Vec<usize> = (0..n).filter(|&y| parity[y]).collect();
                *merged.entry(odd).or_insert(0) += sigma.get(i);
            }
        }
        let mut coef = Vec::new();
        let mut points = Vec::new();
        let mut incident = vec![Vec::new(); n];
        for (pts, c) in merged {
            if c == 0 {
                continue;
            }
            for &y in &pts {
                incident[y].push(coef.len());
            }
            coef.push(c);
            points.push(pts);
        }
        Self {
            coef,
            points,
            incident,
        }
    }

    fn signs(&self, z: &SignVector) -> Vec<i64> {
        self.points
            .iter()
            .map(|pts| pts.iter().map(|&y| z.get(y)).product())
            .collect()
    }

    fn total(&self, signs: &[i64]) -> i64 {
        self.coef.iter().zip(signs).map(|(c, s)| c * s).sum()
    }

    /// Change in the total if `Z(y)` flips.
    fn flip_delta(&self, signs: &[i64], y: usize) -> i64 {
        -2 * self.incident[y]
            .iter()
            .map(|&t| self.coef[t] * signs[t])
            .sum::<i64>()
    }

    fn flip(&self, signs: &mut [i64], y: usize) {
        for &t in &self.incident[y] {
            signs[t] = -signs[t];
        }
    }
}

/// `max_Z |E_i E_x sigma_i prod_{l<k} Z(x + l d_i)|`.
///
/// Exact mode walks all `2^N` sign vectors in Gray-code order and keeps the
/// first maximiser met. Heuristic mode runs 32 restarts of steepest
/// single-flip ascent (at most `50 N` flips each) and returns the best local
/// optimum, which is a lower bound witnessed by the returned `z`.
pub fn max_over_z<R: Rng + ?Sized>(
    ds: &DifferenceSequence,
    sigma: &SignVector,
    k: usize,
    mode: SearchMode,
    rng: &mut R,
) -> Result<SignMax> {
    let n = ds.group().modulus();
    check_lengths(ds, sigma, &SignVector::all_plus(n, SignDomain::Group))?;
    let mono = Monomials::build(ds, sigma, k);
    let denom = (ds.len() * n) as i64;
    let (best, z) = match mode {
        SearchMode::Exact => {
            if n > EXACT_SIGN_LIMIT {
                return Err(Error::EnumerationLimit {
                    what: "modulus for sign enumeration",
                    got: n,
                    limit: EXACT_SIGN_LIMIT,
                });
            }
            let mut signs = vec![1i64; mono.coef.len()];
            let mut total = mono.total(&signs);
            let (mut best, mut arg) = (total.abs(), 0u64);
            for step in 1u64..1 << n {
                let y = step.trailing_zeros() as usize;
                total += mono.flip_delta(&signs, y);
                mono.flip(&mut signs, y);
                if total.abs() > best {
                    best = total.abs();
                    arg = step ^ (step >> 1);
                }
            }
            (best, SignVector::from_negatives(n, arg, SignDomain::Group))
        }
        SearchMode::Heuristic => {
            let seed = child_seed(rng);
            let runs: Vec<(i64, SignVector)> = (0..RESTARTS)
                .into_par_iter()
                .map(|restart| {
                    let mut local = substream(seed, tag::SIGN_SEARCH, restart as u64, 0);
                    climb(&mono, n, &mut local)
                })
                .collect();
            // first restart wins ties
            runs.into_iter()
                .fold(None, |acc: Option<(i64, SignVector)>, run| match acc {
                    Some(a) if a.0 >= run.0 => Some(a),
                    _ => Some(run),
                })
                .expect("at least one restart")
        }
    };
    Ok(SignMax {
        value: Ratio::new(best, denom),
        z,
        mode,
    })
}

fn climb<R: Rng + ?Sized>(mono: &Monomials, n: usize, rng: &mut R) -> (i64, SignVector) {
    let mut z = SignVector::random(n, SignDomain::Group, rng);
    let mut signs = mono.signs(&z);
    let mut total = mono.total(&signs);
    for _ in 0..FLIPS_PER_VERTEX * n {
        let (y, next) = (0..n)
            .map(|y| (y, (total + mono.flip_delta(&signs, y)).abs()))
            .fold((0, i64::MIN), |a, b| if b.1 > a.1 { b } else { a });
        if next <= total.abs() {
            break;
        }
        total += mono.flip_delta(&signs, y);
        mono.flip(&mut signs, y);
        z = z.flipped(y);
    }
    debug_assert_eq!(total, mono.total(&mono.signs(&z)));
    (total.abs(), z)
}

/// `max_{A ⊆ G} |E_i E_x sigma_i prod_{l<k} 1_A(x + l d_i)|` by enumeration,
/// with the first maximiser in binary order.
pub fn max_over_subsets(
    ds: &DifferenceSequence,
    sigma: &SignVector,
    k: usize,
) -> Result<(Ratio<i64>, SubsetMask)> {
    let g = ds.group();
    let n = g.modulus();
    check_lengths(ds, sigma, &SignVector::all_plus(n, SignDomain::Group))?;
    if n > EXACT_SIGN_LIMIT {
        return Err(Error::EnumerationLimit {
            what: "modulus for subset enumeration",
            got: n,
            limit: EXACT_SIGN_LIMIT,
        });
    }
    let mut merged: BTreeMap<u64, i64> = BTreeMap::new();
    for (i, &d) in ds.entries().iter().enumerate() {
        for x in 0..n {
            let support = (0..k).fold(0u64, |acc, l| acc | 1 << g.add(x, g.scale(l as i64, d)));
            *merged.entry(support).or_insert(0) += sigma.get(i);
        }
    }
    let terms: Vec<(u64, i64)> = merged.into_iter().filter(|t| t.1 != 0).collect();
    let (mut best, mut arg) = (0i64, 0u64);
    for a in 0u64..1 << n {
        let v: i64 = terms
            .iter()
            .filter(|(s, _)| s & a == *s)
            .map(|(_, c)| c)
            .sum();
        if v.abs() > best {
            best = v.abs();
            arg = a;
        }
    }
    Ok((
        Ratio::new(best, (ds.len() * n) as i64),
        SubsetMask::from_bits(g, arg),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceCheck {
    pub pm_max: Ratio<i64>,
    pub zero_one_max: Ratio<i64>,
    pub holds: bool,
}

/// Compares the `±1` maximum with the `0/1` maximum of the same functional.
///
/// Only meaningful when each progression visits `k` distinct points or a
/// single point with odd multiplicity, e.g. odd `k` and a modulus coprime
/// to `(k-1)!`. Elsewhere the two polynomials differ after reduction and
/// the comparison is reported but carries no guarantee.
pub fn multilinear_dominance(
    ds: &DifferenceSequence,
    sigma: &SignVector,
    k: usize,
) -> Result<DominanceCheck> {
    let mut unused = substream(0, tag::SIGN_SEARCH, 0, 0);
    let pm = max_over_z(ds, sigma, k, SearchMode::Exact, &mut unused)?;
    let (zero_one_max, _) = max_over_subsets(ds, sigma, k)?;
    Ok(DominanceCheck {
        holds: pm.value >= zero_one_max,
        pm_max: pm.value,
        zero_one_max,
    })
}

#[cfg(test)]
mod tests {
    use super::super::signed_objective;
    use super::*;
    use crate::counting::all_sequences;
    use crate::group::Group;

    fn ds(n: usize, d: &[usize]) -> DifferenceSequence {
        DifferenceSequence::new(Group::new(n).unwrap(), d.to_vec()).unwrap()
    }

    fn naive_max(d: &DifferenceSequence, sigma: &SignVector, k: usize) -> Ratio<i64> {
        let n = d.group().modulus();
        (0u64..1 << n)
            .map(|bits| {
                let z = SignVector::from_negatives(n, bits, SignDomain::Group);
                let v = signed_objective(d, sigma, &z, k).unwrap();
                if v < Ratio::from_integer(0) { -v } else { v }
            })
            .max()
            .unwrap()
    }

    #[test]
    fn constant_difference_is_maximised_by_all_plus() {
        let mut rng = substream(0, tag::VERIFY, 0, 0);
        let one = SignVector::all_plus(1, SignDomain::Sequence);
        let r = max_over_z(&ds(7, &[0]), &one, 3, SearchMode::Exact, &mut rng).unwrap();
        assert_eq!(r.value, Ratio::from_integer(1));
        assert_eq!(r.z, SignVector::all_plus(7, SignDomain::Group));
    }

    #[test]
    fn exact_matches_reenumeration() {
        let mut rng = substream(1, tag::VERIFY, 0, 0);
        let one = SignVector::all_plus(1, SignDomain::Sequence);
        let d = ds(5, &[1]);
        let r = max_over_z(&d, &one, 3, SearchMode::Exact, &mut rng).unwrap();
        assert_eq!(r.value, naive_max(&d, &one, 3));
        assert!(r.value >= Ratio::new(1, 5));
        let at = signed_objective(&d, &one, &r.z, 3).unwrap();
        assert!(at == r.value || at == -r.value);

        for _ in 0..30 {
            let n = rng.random_range(3..=11);
            let m = rng.random_range(1..=4);
            let entries = (0..m).map(|_| rng.random_range(0..n)).collect::<Vec<_>>();
            let d = ds(n, &entries);
            let sigma = SignVector::random(m, SignDomain::Sequence, &mut rng);
            let k = rng.random_range(2..=4);
            let r = max_over_z(&d, &sigma, k, SearchMode::Exact, &mut rng).unwrap();
            assert_eq!(r.value, naive_max(&d, &sigma, k));
        }
    }

    #[test]
    fn heuristic_never_exceeds_exact() {
        let mut rng = substream(2, tag::VERIFY, 0, 0);
        for _ in 0..20 {
            let n = rng.random_range(3..=16);
            let m = rng.random_range(1..=5);
            let entries = (0..m).map(|_| rng.random_range(0..n)).collect::<Vec<_>>();
            let d = ds(n, &entries);
            let sigma = SignVector::random(m, SignDomain::Sequence, &mut rng);
            let exact = max_over_z(&d, &sigma, 3, SearchMode::Exact, &mut rng).unwrap();
            let heur = max_over_z(&d, &sigma, 3, SearchMode::Heuristic, &mut rng).unwrap();
            assert!(heur.value <= exact.value);
            let at = signed_objective(&d, &sigma, &heur.z, 3).unwrap();
            assert!(at == heur.value || at == -heur.value);
        }
    }

    #[test]
    fn exact_limit_is_enforced() {
        let mut rng = substream(3, tag::VERIFY, 0, 0);
        let one = SignVector::all_plus(1, SignDomain::Sequence);
        assert!(matches!(
            max_over_z(&ds(25, &[1]), &one, 3, SearchMode::Exact, &mut rng),
            Err(Error::EnumerationLimit { .. })
        ));
        assert!(max_over_z(&ds(25, &[1]), &one, 3, SearchMode::Heuristic, &mut rng).is_ok());
    }

    #[test]
    fn dominance_on_small_instances() {
        let one = SignVector::all_plus(1, SignDomain::Sequence);
        let c = multilinear_dominance(&ds(7, &[0]), &one, 3).unwrap();
        assert_eq!(c.pm_max, Ratio::from_integer(1));
        assert_eq!(c.zero_one_max, Ratio::from_integer(1));
        let g = Group::new(5).unwrap();
        for d in all_sequences(g, 2) {
            for bits in 0..4u64 {
                let sigma = SignVector::from_negatives(2, bits, SignDomain::Sequence);
                assert!(multilinear_dominance(&d, &sigma, 3).unwrap().holds);
            }
        }
    }
}
