//! Monte Carlo estimates of `p(m)` and of the critical size.
//!
//! Trials draw `D` uniformly from `G^m` (sequences, with replacement), so the
//! estimate is the sequence threshold: an upper-bound proxy for the threshold
//! of random `m`-element sets. Each trial owns the stream
//! `(seed, TRIAL, m, trial_index)`; successes are summed, so results do not
//! depend on scheduling.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::DifferenceSequence;
use crate::error::{Error, Result};
use crate::group::{ApParams, Group};
use crate::rng::{substream, tag};

use super::is_intersective_exact;

/// One Monte Carlo trial: sample `D` from `G^m` and decide it exactly.
pub fn trial<R: Rng + ?Sized>(
    m: usize,
    params: &ApParams,
    g: &Group,
    exact_limit: usize,
    rng: &mut R,
) -> Result<bool> {
    if m == 0 {
        return Err(Error::EmptyDifferences);
    }
    let n = g.modulus();
    let entries = (0..m).map(|_| rng.random_range(0..n)).collect();
    let ds = DifferenceSequence::new(*g, entries)?;
    Ok(is_intersective_exact(&ds, params, exact_limit)?.intersective)
}

/// Standard normal quantile by bisection on `Phi(z) = (1 + erf(z / sqrt 2)) / 2`.
pub fn normal_quantile(q: f64) -> f64 {
    assert!(q > 0.0 && q < 1.0);
    let cdf = |z: f64| 0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2));
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided Wilson score interval for `successes / trials`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0);
    assert!(confidence > 0.0 && confidence < 1.0);
    let z = normal_quantile(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub m: usize,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// `p_hat = successes / trials` with its Wilson interval. Trial `i` uses
/// stream `(seed, TRIAL, m, i)`.
pub fn estimate_p(
    m: usize,
    trials: u64,
    params: &ApParams,
    g: &Group,
    seed: u64,
    confidence: f64,
    exact_limit: usize,
) -> Result<ProbePoint> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::EmptyDifferences);
    }
    let outcomes: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, tag::TRIAL, m as u64, i);
            trial(m, params, g, exact_limit, &mut rng)
        })
        .collect::<Result<_>>()?;
    let successes = outcomes.iter().filter(|&&b| b).count() as u64;
    let (ci_low, ci_high) = wilson_interval(successes, trials, confidence);
    Ok(ProbePoint {
        m,
        trials,
        successes,
        p_hat: successes as f64 / trials as f64,
        ci_low,
        ci_high,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalSizePolicy {
    pub trials_per_m: u64,
    pub confidence: f64,
    /// Boundary probes are re-run with this many times the base trials.
    pub retest_factor: u64,
    /// A probe qualifies when `p_hat >= 1/2` and `ci_low >= ci_floor`.
    pub ci_floor: f64,
    /// Doubling stops here; `None` means `8 N`.
    pub m_max: Option<usize>,
    pub exact_limit: usize,
}

impl CriticalSizePolicy {
    pub fn new(k: usize) -> Self {
        Self {
            trials_per_m: 200,
            confidence: 0.95,
            retest_factor: 4,
            ci_floor: 0.45,
            m_max: None,
            exact_limit: super::default_exact_limit(k),
        }
    }

    fn qualifies(&self, p: &ProbePoint) -> bool {
        p.p_hat >= 0.5 && p.ci_low >= self.ci_floor
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalSizeEstimate {
    pub modulus: usize,
    pub k: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Smallest probed `m` meeting the boundary rule; `None` if `m_max` was
    /// reached first.
    pub m_star_hat: Option<usize>,
    /// Every probe, sorted by `m`; re-tested probes carry their larger trial count.
    pub p_curve: Vec<ProbePoint>,
    pub threshold_kind: String,
}

/// Doubles `m` from 1 until `p_hat >= 1/2`, bisects the last interval, then
/// re-tests the candidate and both neighbours with `retest_factor` times the
/// trials. The answer is the smallest probed `m` with `p_hat >= 1/2` and
/// `ci_low >= ci_floor`; if none qualifies yet, probing continues upward.
pub fn estimate_critical_size(
    params: &ApParams,
    g: &Group,
    policy: &CriticalSizePolicy,
    seed: u64,
) -> Result<CriticalSizeEstimate> {
    let n = g.modulus();
    let m_max = policy.m_max.unwrap_or(8 * n).max(1);
    let base = policy.trials_per_m;
    let mut curve: BTreeMap<usize, ProbePoint> = BTreeMap::new();
    let probe = |m: usize, trials: u64, curve: &mut BTreeMap<usize, ProbePoint>| -> Result<ProbePoint> {
        let p = estimate_p(m, trials, params, g, seed, policy.confidence, policy.exact_limit)?;
        curve.insert(m, p.clone());
        Ok(p)
    };

    let mut lo = 0usize;
    let mut m = 1usize;
    let hi = loop {
        let p = probe(m, base, &mut curve)?;
        if p.p_hat >= 0.5 {
            break Some(m);
        }
        lo = m;
        if m >= m_max {
            break None;
        }
        m = (2 * m).min(m_max);
    };

    let mut m_star_hat = None;
    if let Some(mut hi) = hi {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if probe(mid, base, &mut curve)?.p_hat >= 0.5 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let retest = base * policy.retest_factor;
        for c in [hi.saturating_sub(1), hi, hi + 1] {
            if c >= 1 && c <= m_max {
                probe(c, retest, &mut curve)?;
            }
        }
        m_star_hat = curve.values().find(|p| policy.qualifies(p)).map(|p| p.m);
        let mut next = hi + 2;
        while m_star_hat.is_none() && next <= m_max {
            if policy.qualifies(&probe(next, retest, &mut curve)?) {
                m_star_hat = Some(next);
            }
            next += 1;
        }
    }

    Ok(CriticalSizeEstimate {
        modulus: n,
        k: params.k(),
        epsilon: params.epsilon(),
        seed,
        m_star_hat,
        p_curve: curve.into_values().collect(),
        threshold_kind: "sequence".into(),
    })
}
