//! Exact search for a D-AP-free set of at least a target size.
//!
//! Two branch-and-bound solvers share the contract "return a witness of size
//! >= target, or prove none exists":
//!
//! * [`HypergraphSearch`] works on any progression length. It branches on the
//!   undecided vertex of highest live degree (include first), forces exclusions
//!   when an edge is one vertex short of being covered, and prunes with
//!   `chosen + undecided - packing < target`, where `packing` counts disjoint
//!   live edge remainders (each of which must lose a vertex).
//! * [`GraphSearch`] handles `k = 2`, where edges are pairs `{x, x + d}`.
//!   It runs the colour-ordered clique search on the complement: the
//!   undecided vertices are greedily covered by cliques of the graph, an
//!   independent set meets each clique at most once, and vertices are tried in
//!   decreasing cover index.
//!
//! Both fix vertex 0 in the witness: D-AP-freeness is translation invariant,
//! so any nonempty witness can be shifted to contain 0.
//!
//! Before either runs, [`window_bound_excludes`] tries to rule the target out
//! by averaging: the translates of a vertex set `S` cover each vertex `|S|`
//! times, so `alpha(H) * |S| <= N * alpha(H[S])`.

use super::hypergraph::{bits, ApHypergraph};

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    pub nodes: u64,
}

pub fn find_dense_apfree(h: &ApHypergraph, target: usize, stats: &mut SearchStats) -> Option<u128> {
    if target == 0 {
        return Some(0);
    }
    if target > h.n {
        return None;
    }
    if window_bound_excludes(h, target) {
        return None;
    }
    if h.is_graph() {
        GraphSearch::new(h, target).run(stats)
    } else {
        HypergraphSearch::new(h, target).run(stats)
    }
}

/// Longest window `{0, u, ..., (L-1)u}` tried by the averaging bound.
pub const WINDOW_MAX: usize = 20;

/// True when some window `S = {0, u, ..., (L-1)u}` with `L <= WINDOW_MAX`
/// gives `N * alpha(H[S]) < target * L`, which proves no independent set
/// reaches `target`.
pub fn window_bound_excludes(h: &ApHypergraph, target: usize) -> bool {
    let n = h.n;
    for u in 1..=n / 2 {
        let len = WINDOW_MAX.min(n / num_integer::gcd(u, n));
        let mut index = vec![usize::MAX; n];
        for i in 0..len {
            index[i * u % n] = i;
        }
        // edges inside the longest window, in local coordinates, by last vertex
        let mut by_last: Vec<Vec<u32>> = vec![Vec::new(); len];
        for &e in &h.edges {
            let mut local = 0u32;
            let mut last = 0;
            let inside = bits(e).all(|v| {
                let i = index[v];
                if i == usize::MAX {
                    return false;
                }
                local |= 1 << i;
                last = last.max(i);
                true
            });
            if inside {
                by_last[last].push(local);
            }
        }
        let mut edges: Vec<u32> = Vec::new();
        let mut alpha = 0;
        for l in 1..=len {
            edges.extend_from_slice(&by_last[l - 1]);
            let newest = 1u32 << (l - 1);
            if !edges.contains(&newest)
                && window_independent(&edges, newest, newest - 1, alpha)
            {
                alpha += 1;
            }
            if n * alpha < target * l {
                return true;
            }
        }
    }
    false
}

/// Whether `chosen` extends by `need` more vertices of `rest` without
/// completing an edge.
fn window_independent(edges: &[u32], chosen: u32, rest: u32, need: usize) -> bool {
    if need == 0 {
        return true;
    }
    if (rest.count_ones() as usize) < need {
        return false;
    }
    let v = 31 - rest.leading_zeros();
    let bit = 1u32 << v;
    let rest = rest & !bit;
    let with = chosen | bit;
    let ok = edges.iter().all(|&e| e & bit == 0 || e & !with != 0);
    (ok && window_independent(edges, with, rest, need - 1)) || window_independent(edges, chosen, rest, need)
}

pub struct HypergraphSearch<'a> {
    h: &'a ApHypergraph,
    target: usize,
}

impl<'a> HypergraphSearch<'a> {
    pub fn new(h: &'a ApHypergraph, target: usize) -> Self {
        Self { h, target }
    }

    pub fn run(&self, stats: &mut SearchStats) -> Option<u128> {
        let mut excluded = 0u128;
        // singleton edges (zero difference) rule their vertex out entirely
        for &e in &self.h.edges {
            if e.count_ones() == 1 {
                excluded |= e;
            }
        }
        if excluded & 1 != 0 {
            return None;
        }
        let (chosen, excluded) = self.include(1, excluded, 0)?;
        self.search(chosen, excluded, stats)
    }

    /// Adds `v` to the chosen set and applies forced exclusions. `None` on conflict.
    fn include(&self, chosen: u128, mut excluded: u128, v: usize) -> Option<(u128, u128)> {
        let chosen = chosen | 1u128 << v;
        for &ei in &self.h.incident[v] {
            let e = self.h.edges[ei];
            if e & excluded != 0 {
                continue;
            }
            let rest = e & !chosen;
            match rest.count_ones() {
                0 => return None,
                1 => excluded |= rest,
                _ => {}
            }
        }
        Some((chosen, excluded))
    }

    fn search(&self, chosen: u128, excluded: u128, stats: &mut SearchStats) -> Option<u128> {
        stats.nodes += 1;
        let undecided = self.h.all() & !chosen & !excluded;
        let have = chosen.count_ones() as usize;
        if have >= self.target {
            return Some(chosen);
        }
        let free = undecided.count_ones() as usize;
        if have + free < self.target {
            return None;
        }

        // live remainders, smallest first, packed greedily
        let mut live: Vec<u128> = self
            .h
            .edges
            .iter()
            .filter(|&&e| e & excluded == 0)
            .map(|&e| e & !chosen)
            .collect();
        if live.is_empty() {
            // nothing can complete an edge; take everything
            return Some(chosen | undecided);
        }
        live.sort_unstable_by_key(|r| r.count_ones());
        let mut used = 0u128;
        let mut packing = 0usize;
        for &r in &live {
            if r & used == 0 {
                used |= r;
                packing += 1;
            }
        }
        if have + free - packing < self.target {
            return None;
        }

        let mut degree = vec![0u32; self.h.n];
        for &r in &live {
            for v in bits(r) {
                degree[v] += 1;
            }
        }
        let v = bits(undecided)
            .max_by_key(|&v| (degree[v], std::cmp::Reverse(v)))
            .expect("undecided is nonempty when live edges exist");

        if let Some((c, x)) = self.include(chosen, excluded, v) {
            if let Some(found) = self.search(c, x, stats) {
                return Some(found);
            }
        }
        self.search(chosen, excluded | 1u128 << v, stats)
    }
}

pub struct GraphSearch {
    n: usize,
    target: usize,
    /// Neighbourhoods in the pair graph; `blocked` marks vertices on a loop.
    adj: Vec<u128>,
    blocked: u128,
}

impl GraphSearch {
    pub fn new(h: &ApHypergraph, target: usize) -> Self {
        let mut adj = vec![0u128; h.n];
        let mut blocked = 0u128;
        for &e in &h.edges {
            let vs: Vec<usize> = bits(e).collect();
            match vs.as_slice() {
                [v] => blocked |= 1u128 << v,
                [a, b] => {
                    adj[*a] |= 1u128 << b;
                    adj[*b] |= 1u128 << a;
                }
                _ => unreachable!("graph search needs edges of size <= 2"),
            }
        }
        Self {
            n: h.n,
            target,
            adj,
            blocked,
        }
    }

    pub fn run(&self, stats: &mut SearchStats) -> Option<u128> {
        if self.blocked & 1 != 0 {
            return None;
        }
        let all = if self.n == 128 { !0 } else { (1u128 << self.n) - 1 };
        let cand = all & !self.blocked & !self.adj[0] & !1;
        self.expand(1, cand, stats)
    }

    /// Greedy clique cover of `cand`; returns vertices with their cover index,
    /// in increasing index order.
    fn cover(&self, cand: u128) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(cand.count_ones() as usize);
        let mut rest = cand;
        let mut idx = 0;
        while rest != 0 {
            idx += 1;
            let mut q = rest;
            while q != 0 {
                let v = q.trailing_zeros() as usize;
                out.push((v, idx));
                rest &= !(1u128 << v);
                q &= self.adj[v];
                q &= !(1u128 << v);
            }
        }
        out
    }

    fn expand(&self, chosen: u128, mut cand: u128, stats: &mut SearchStats) -> Option<u128> {
        stats.nodes += 1;
        let have = chosen.count_ones() as usize;
        if have >= self.target {
            return Some(chosen);
        }
        if have + (cand.count_ones() as usize) < self.target {
            return None;
        }
        let order = self.cover(cand);
        for &(v, idx) in order.iter().rev() {
            if have + idx < self.target {
                return None;
            }
            let bit = 1u128 << v;
            let next = cand & !self.adj[v] & !bit;
            if let Some(found) = self.expand(chosen | bit, next, stats) {
                return Some(found);
            }
            cand &= !bit;
        }
        None
    }
}
