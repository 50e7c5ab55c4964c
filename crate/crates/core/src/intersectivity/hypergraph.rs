//! The progression hypergraph on Z/N: one edge per distinct vertex set
//! `{x, x + d, ..., x + (k-1)d}` with `d` in the difference sequence.
//!
//! A set is D-AP-free exactly when it contains no edge, so witnesses are the
//! independent sets of this hypergraph. Vertex sets are `u128` masks, which
//! caps the exact machinery at `N <= 128`.

use std::collections::BTreeSet;

use crate::counting::DifferenceSequence;
use crate::group::progression_support;

pub const MAX_VERTICES: usize = 128;

#[derive(Debug, Clone)]
pub struct ApHypergraph {
    pub n: usize,
    /// Distinct edges, sorted by (size, mask).
    pub edges: Vec<u128>,
    /// `incident[v]` lists the indices of the edges containing `v`.
    pub incident: Vec<Vec<usize>>,
}

impl ApHypergraph {
    pub fn build(ds: &DifferenceSequence, k: usize) -> Self {
        let g = ds.group();
        let n = g.modulus();
        assert!(n <= MAX_VERTICES, "hypergraph masks hold at most {MAX_VERTICES} vertices");
        let mut set = BTreeSet::new();
        for d in ds.distinct() {
            for x in 0..n {
                let mask = progression_support(g, x, d, k)
                    .into_iter()
                    .fold(0u128, |m, y| m | 1u128 << y);
                set.insert((mask.count_ones(), mask));
            }
        }
        let edges: Vec<u128> = set.into_iter().map(|(_, m)| m).collect();
        let mut incident = vec![Vec::new(); n];
        for (ei, &e) in edges.iter().enumerate() {
            for v in bits(e) {
                incident[v].push(ei);
            }
        }
        Self { n, edges, incident }
    }

    pub fn all(&self) -> u128 {
        if self.n == 128 {
            !0
        } else {
            (1u128 << self.n) - 1
        }
    }

    /// True when every edge has at most two vertices, so the graph solver applies.
    pub fn is_graph(&self) -> bool {
        self.edges.iter().all(|e| e.count_ones() <= 2)
    }

    pub fn is_independent(&self, set: u128) -> bool {
        self.edges.iter().all(|&e| e & set != e)
    }
}

pub fn bits(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}
