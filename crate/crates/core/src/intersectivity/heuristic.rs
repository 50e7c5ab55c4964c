//! Randomized search for large D-AP-free sets past the exact limit.
//!
//! Greedy insertion in random order, then perturbation moves: drop a random
//! member, refill greedily with the dropped vertex held out, keep the result
//! if it is no smaller. Every step is one insertion attempt or one removal.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::counting::{DifferenceSequence, SubsetMask};
use crate::group::progression_support;

struct Incidence {
    /// Distinct edges as sorted vertex lists.
    edges: Vec<Vec<usize>>,
    incident: Vec<Vec<usize>>,
    blocked: Vec<bool>,
}

impl Incidence {
    fn build(ds: &DifferenceSequence, k: usize) -> Self {
        let g = ds.group();
        let n = g.modulus();
        let mut edges: Vec<Vec<usize>> = Vec::new();
        for d in ds.distinct() {
            for x in 0..n {
                let mut e = progression_support(g, x, d, k);
                e.sort_unstable();
                e.dedup();
                edges.push(e);
            }
        }
        edges.sort();
        edges.dedup();
        let mut incident = vec![Vec::new(); n];
        let mut blocked = vec![false; n];
        for (ei, e) in edges.iter().enumerate() {
            if e.len() == 1 {
                blocked[e[0]] = true;
            }
            for &v in e {
                incident[v].push(ei);
            }
        }
        Self {
            edges,
            incident,
            blocked,
        }
    }
}

struct State<'a> {
    inc: &'a Incidence,
    member: Vec<bool>,
    filled: Vec<usize>,
    size: usize,
}

impl<'a> State<'a> {
    fn new(inc: &'a Incidence, n: usize) -> Self {
        Self {
            inc,
            member: vec![false; n],
            filled: vec![0; inc.edges.len()],
            size: 0,
        }
    }

    fn addable(&self, v: usize) -> bool {
        !self.member[v]
            && !self.inc.blocked[v]
            && self.inc.incident[v]
                .iter()
                .all(|&ei| self.filled[ei] + 1 < self.inc.edges[ei].len())
    }

    fn add(&mut self, v: usize) {
        self.member[v] = true;
        self.size += 1;
        for &ei in &self.inc.incident[v] {
            self.filled[ei] += 1;
        }
    }

    fn remove(&mut self, v: usize) {
        self.member[v] = false;
        self.size -= 1;
        for &ei in &self.inc.incident[v] {
            self.filled[ei] -= 1;
        }
    }

    fn members(&self) -> Vec<usize> {
        (0..self.member.len()).filter(|&v| self.member[v]).collect()
    }
}

/// Searches for a D-AP-free set, stopping early once `stop_at` members are
/// reached. The returned set is always D-AP-free; its size is a lower bound
/// on the maximum.
pub fn search_apfree<R: Rng + ?Sized>(
    ds: &DifferenceSequence,
    k: usize,
    budget: u64,
    stop_at: Option<usize>,
    rng: &mut R,
) -> SubsetMask {
    let g = *ds.group();
    let n = g.modulus();
    let inc = Incidence::build(ds, k);
    let mut st = State::new(&inc, n);
    let mut steps = 0u64;
    let done = |size: usize| stop_at.is_some_and(|t| size >= t);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for &v in &order {
        if steps >= budget {
            break;
        }
        steps += 1;
        if st.addable(v) {
            st.add(v);
        }
    }
    let mut best = st.members();

    while steps < budget && !done(best.len()) && st.size > 0 {
        let before = st.members();
        let drop = before[rng.random_range(0..before.len())];
        st.remove(drop);
        steps += 1;
        order.shuffle(rng);
        let mut added = Vec::new();
        for &v in &order {
            if steps >= budget {
                break;
            }
            if v == drop {
                continue;
            }
            steps += 1;
            if st.addable(v) {
                st.add(v);
                added.push(v);
            }
        }
        if st.size < before.len() {
            for v in added {
                st.remove(v);
            }
            st.add(drop);
        }
        if st.size > best.len() {
            best = st.members();
        }
    }

    let out = SubsetMask::from_elements(&g, best).expect("members lie in the group");
    assert!(
        crate::counting::find_witness(&out, ds, k).is_none(),
        "heuristic returned a set containing a progression"
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;
    use crate::rng::{substream, tag};

    fn ds(n: usize, d: &[usize]) -> DifferenceSequence {
        DifferenceSequence::new(Group::new(n).unwrap(), d.to_vec()).unwrap()
    }

    #[test]
    fn zero_difference_gives_empty_set() {
        let mut rng = substream(0, tag::HEURISTIC, 0, 0);
        assert!(search_apfree(&ds(7, &[0, 3]), 3, 1000, None, &mut rng).is_empty());
    }

    #[test]
    fn reaches_known_maxima() {
        let mut rng = substream(0, tag::HEURISTIC, 0, 1);
        assert!(search_apfree(&ds(7, &[1]), 3, 2000, None, &mut rng).len() >= 4);
        assert_eq!(search_apfree(&ds(5, &[1, 2, 3, 4]), 3, 2000, None, &mut rng).len(), 2);
    }
}
