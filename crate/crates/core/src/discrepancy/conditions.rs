use rand::Rng;
use serde::{Deserialize, Serialize};

use super::IndexPartition;
use crate::counting::DifferenceSequence;
use crate::error::{Error, Result};
use crate::group::{is_good_pair, ApParams, Group};

/// Pairs `(i, j) in L x R` whose supports `P_ij(0)` have fewer than `4r` points.
pub fn collision_count(ds: &DifferenceSequence, part: &IndexPartition, r: usize) -> usize {
    let g = ds.group();
    let d = ds.entries();
    part.left()
        .iter()
        .map(|&i| {
            part.right()
                .iter()
                .filter(|&&j| !is_good_pair(g, d[i], d[j], r))
                .count()
        })
        .sum()
}

/// `max_{x != 0} #{(i, l) : -2r <= l <= 2r, l d_i = x}`.
pub fn max_multiplicity(ds: &DifferenceSequence, r: usize) -> usize {
    let g = ds.group();
    let mut hits = vec![0usize; g.modulus()];
    for &d in ds.entries() {
        for l in -2 * r as i64..=2 * r as i64 {
            hits[g.scale(l, d)] += 1;
        }
    }
    hits.into_iter().skip(1).max().unwrap_or(0)
}

/// `ceil(slack * r^2 m^2 / N) + 1`.
pub fn collision_threshold(slack: f64, r: usize, m: usize, n: usize) -> usize {
    let raw = slack * (r * r * m * m) as f64 / n as f64;
    (raw - 1e-9).ceil().max(0.0) as usize + 1
}

/// `4 ceil(ln N)`.
pub fn multiplicity_threshold(n: usize) -> usize {
    4 * (n as f64).ln().ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodSet {
    pub sequence: DifferenceSequence,
    pub partition: IndexPartition,
    pub collisions: usize,
    pub collision_threshold: usize,
    pub multiplicity: usize,
    pub multiplicity_threshold: usize,
    pub attempts_used: usize,
}

/// Draws uniform `D in G^m` with a random balanced split until both the
/// collision count and the multiplicity are within their thresholds.
pub fn good_set_search<R: Rng + ?Sized>(
    m: usize,
    params: &ApParams,
    g: &Group,
    rng: &mut R,
    attempts: usize,
    collision_slack: f64,
) -> Result<GoodSet> {
    let r = params.half_length()?;
    if m == 0 {
        return Err(Error::EmptyDifferences);
    }
    if collision_slack.is_nan() || collision_slack < 0.0 {
        return Err(Error::InvalidParameter("collision slack must be non-negative".into()));
    }
    let n = g.modulus();
    let c_max = collision_threshold(collision_slack, r, m, n);
    let mult_max = multiplicity_threshold(n);
    let mut best: Option<(usize, usize, usize, Vec<usize>)> = None;
    for attempt in 1..=attempts {
        let entries: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();
        let sequence = DifferenceSequence::new(*g, entries)?;
        let partition = IndexPartition::random_balanced(m, rng);
        let collisions = collision_count(&sequence, &partition, r);
        let multiplicity = max_multiplicity(&sequence, r);
        if collisions <= c_max && multiplicity <= mult_max {
            return Ok(GoodSet {
                sequence,
                partition,
                collisions,
                collision_threshold: c_max,
                multiplicity,
                multiplicity_threshold: mult_max,
                attempts_used: attempt,
            });
        }
        let excess = collisions.saturating_sub(c_max) + multiplicity.saturating_sub(mult_max);
        if best.as_ref().is_none_or(|b| excess < b.0) {
            best = Some((excess, collisions, multiplicity, sequence.entries().to_vec()));
        }
    }
    let (_, best_collisions, best_multiplicity, best) = best.unwrap_or_default();
    Err(Error::GoodSetExhausted {
        attempts,
        best,
        best_collisions,
        best_multiplicity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, tag};

    fn ds(n: usize, d: &[usize]) -> DifferenceSequence {
        DifferenceSequence::new(Group::new(n).unwrap(), d.to_vec()).unwrap()
    }

    fn split() -> IndexPartition {
        IndexPartition::new(2, vec![0], vec![1]).unwrap()
    }

    #[test]
    fn collision_examples() {
        assert_eq!(collision_count(&ds(11, &[1, 1]), &split(), 1), 1);
        assert_eq!(collision_count(&ds(11, &[1, 3]), &split(), 1), 0);
        assert_eq!(collision_count(&ds(7, &[1, 2]), &split(), 1), 1);
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(max_multiplicity(&ds(7, &[1]), 1), 1);
        assert_eq!(max_multiplicity(&ds(7, &[0, 0, 0]), 1), 0);
        assert_eq!(max_multiplicity(&ds(9, &[0, 0, 0]), 3), 0);
        assert_eq!(max_multiplicity(&ds(7, &[1, 1]), 1), 2);
    }

    #[test]
    fn thresholds() {
        assert_eq!(collision_threshold(4.0, 1, 2, 101), 2);
        assert_eq!(collision_threshold(0.0, 1, 4, 3), 1);
        assert_eq!(multiplicity_threshold(101), 20);
    }

    #[test]
    fn search_succeeds_quickly_when_sparse() {
        let params = ApParams::new(3, 0.5).unwrap();
        let g = Group::new(101).unwrap();
        let mut rng = substream(5, tag::GOOD_SET, 0, 0);
        let found = good_set_search(2, &params, &g, &mut rng, 10, 4.0).unwrap();
        assert!(found.attempts_used <= 3);
        assert!(found.collisions <= found.collision_threshold);
        assert!(found.multiplicity <= found.multiplicity_threshold);
        assert_eq!(collision_count(&found.sequence, &found.partition, 1), found.collisions);
    }

    #[test]
    fn search_exhausts_when_collisions_are_forced() {
        let params = ApParams::new(3, 0.5).unwrap();
        let g = Group::new(3).unwrap();
        let mut rng = substream(6, tag::GOOD_SET, 0, 0);
        match good_set_search(4, &params, &g, &mut rng, 5, 0.0) {
            Err(Error::GoodSetExhausted { attempts, best, best_collisions, .. }) => {
                assert_eq!(attempts, 5);
                assert_eq!(best.len(), 4);
                assert_eq!(best_collisions, 4);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn even_k_is_rejected() {
        let params = ApParams::new(4, 0.5).unwrap();
        let g = Group::new(11).unwrap();
        let mut rng = substream(7, tag::GOOD_SET, 0, 0);
        assert!(good_set_search(2, &params, &g, &mut rng, 5, 4.0).is_err());
    }
}
