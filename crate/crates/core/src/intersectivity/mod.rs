//! Deciding (t, epsilon)-intersectivity of a difference sequence and
//! estimating the critical size by Monte Carlo.
//!
//! A sequence `D` is (k-1, epsilon)-intersective in Z/N when every `A` with
//! `|A| >= ceil(epsilon N)` contains a k-term progression with difference in
//! `D`. The exact path searches for a counterexample `A` (a dense D-AP-free
//! set) and either returns it or proves none exists.

pub mod estimate;
pub mod exact;
pub mod heuristic;
pub mod hypergraph;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::counting::{find_witness, lambda_d, DifferenceSequence, SubsetMask};
use crate::error::{Error, Result};
use crate::group::{check_coprime, ApParams};

pub use estimate::{
    estimate_critical_size, estimate_p, trial, wilson_interval, CriticalSizeEstimate,
    CriticalSizePolicy, ProbePoint,
};
pub use heuristic::search_apfree;

/// Default largest modulus for the exact decision. Pair graphs (`k = 2`)
/// stay tractable up to the 128-vertex mask width.
pub fn default_exact_limit(k: usize) -> usize {
    if k == 2 {
        hypergraph::MAX_VERTICES
    } else {
        40
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    HeuristicLowerBound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectivityVerdict {
    pub intersective: bool,
    /// A dense D-AP-free set; present iff `intersective` is false.
    pub witness: Option<SubsetMask>,
    pub method: Method,
}

impl IntersectivityVerdict {
    fn not_intersective(witness: SubsetMask, method: Method) -> Self {
        Self {
            intersective: false,
            witness: Some(witness),
            method,
        }
    }
}

/// Outcome of a decision that may fall back to the heuristic.
#[derive(Debug, Clone)]
pub enum Decision {
    Settled(IntersectivityVerdict),
    /// The heuristic found no dense witness; `best` is the largest D-AP-free
    /// set it saw. Nothing is claimed about intersectivity.
    Inconclusive { best: SubsetMask, target: usize },
}

fn check_witness(w: &SubsetMask, ds: &DifferenceSequence, params: &ApParams) {
    let target = params.density_target(ds.group());
    assert!(w.len() >= target, "witness below density target");
    if !ds.is_empty() {
        assert!(
            lambda_d(w, ds, params.k()).expect("nonempty").is_zero(),
            "witness contains a progression"
        );
    }
}

/// Exact decision by branch-and-bound over the progression hypergraph.
pub fn is_intersective_exact(
    ds: &DifferenceSequence,
    params: &ApParams,
    exact_limit: usize,
) -> Result<IntersectivityVerdict> {
    let g = ds.group();
    let n = g.modulus();
    let limit = exact_limit.min(hypergraph::MAX_VERTICES);
    if n > limit {
        return Err(Error::ExactLimitExceeded { modulus: n, limit });
    }
    if !check_coprime(g, params) {
        return Err(Error::NotCoprime {
            modulus: n,
            k: params.k(),
        });
    }
    let target = params.density_target(g);
    let h = hypergraph::ApHypergraph::build(ds, params.k());
    let mut stats = exact::SearchStats::default();
    let verdict = match exact::find_dense_apfree(&h, target, &mut stats) {
        Some(mask) => {
            let w = SubsetMask::from_elements(g, hypergraph::bits(mask))?;
            IntersectivityVerdict::not_intersective(w, Method::Exact)
        }
        None => IntersectivityVerdict {
            intersective: true,
            witness: None,
            method: Method::Exact,
        },
    };
    if let Some(w) = &verdict.witness {
        check_witness(w, ds, params);
    }
    Ok(verdict)
}

/// Witness search past the exact limit. Only ever settles "not intersective".
pub fn max_apfree_heuristic<R: Rng + ?Sized>(
    ds: &DifferenceSequence,
    params: &ApParams,
    budget: u64,
    rng: &mut R,
) -> SubsetMask {
    heuristic::search_apfree(ds, params.k(), budget.max(1), None, rng)
}

/// Exact when `N <= exact_limit`, otherwise a heuristic witness hunt.
pub fn decide<R: Rng + ?Sized>(
    ds: &DifferenceSequence,
    params: &ApParams,
    exact_limit: usize,
    budget: u64,
    rng: &mut R,
) -> Result<Decision> {
    let n = ds.group().modulus();
    if n <= exact_limit.min(hypergraph::MAX_VERTICES) {
        return is_intersective_exact(ds, params, exact_limit).map(Decision::Settled);
    }
    let target = params.density_target(ds.group());
    let best = heuristic::search_apfree(ds, params.k(), budget.max(1), Some(target), rng);
    if best.len() >= target {
        debug_assert!(find_witness(&best, ds, params.k()).is_none());
        check_witness(&best, ds, params);
        Ok(Decision::Settled(IntersectivityVerdict::not_intersective(
            best,
            Method::HeuristicLowerBound,
        )))
    } else {
        Ok(Decision::Inconclusive { best, target })
    }
}
