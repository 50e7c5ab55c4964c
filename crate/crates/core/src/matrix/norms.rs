use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SparseMatrix;
use crate::error::{Error, Result};
use crate::rng::{substream, tag};

pub const EXACT_INF_TO_ONE_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Dense eigensolve up to this dimension, power iteration above.
    pub dense_limit: usize,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            dense_limit: 512,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralNorm {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest singular value. Symmetric input is the intended case; anything
/// else falls back to a dense SVD regardless of size.
pub fn norm_spectral(m: &SparseMatrix, opts: &SpectralOptions) -> SpectralNorm {
    if m.is_zero() {
        return SpectralNorm {
            value: 0.0,
            converged: true,
            iterations: 0,
        };
    }
    let symmetric = m.is_symmetric();
    if m.dim() <= opts.dense_limit || !symmetric {
        return SpectralNorm {
            value: dense_spectral(&m.to_dense(), symmetric),
            converged: true,
            iterations: 0,
        };
    }
    power_iteration(m, opts)
}

pub fn dense_spectral(m: &DMatrix<f64>, symmetric: bool) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if symmetric {
        SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .fold(0.0f64, |a, &l| a.max(l.abs()))
    } else {
        m.clone()
            .singular_values()
            .iter()
            .fold(0.0f64, |a, &s| a.max(s))
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Power iteration on `M`, stopping once the Rayleigh residual
/// `||Mx - lambda x||` is below `tol |lambda|`. If that stalls
/// (a `±lambda` pair makes the iterate oscillate) the remaining budget goes
/// to `M^2`, whose top eigenvalue is `||M||^2`.
fn power_iteration(m: &SparseMatrix, opts: &SpectralOptions) -> SpectralNorm {
    let mut rng = substream(opts.seed, tag::POWER_START, 0, 0);
    let mut x: Vec<f64> = (0..m.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut x);
    let stall = opts.max_iter.min(1000);
    for it in 1..=stall {
        let mut y = m.mul_vec(&x);
        let lambda = dot(&x, &y);
        let residual = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= opts.tol * lambda.abs() {
            return SpectralNorm {
                value: lambda.abs(),
                converged: true,
                iterations: it,
            };
        }
        normalize(&mut y);
        x = y;
    }
    let mut prev = f64::NAN;
    let mut value = 0.0;
    for it in stall + 1..=opts.max_iter {
        let mut y = m.mul_vec(&m.mul_vec(&x));
        // x^T M^2 x for unit x
        let mu = dot(&x, &y);
        normalize(&mut y);
        x = y;
        value = mu.max(0.0).sqrt();
        if (mu - prev).abs() <= opts.tol * mu.abs() {
            return SpectralNorm {
                value,
                converged: true,
                iterations: it,
            };
        }
        prev = mu;
    }
    SpectralNorm {
        value,
        converged: false,
        iterations: opts.max_iter,
    }
}

/// Maximum column `l1` weight.
pub fn norm_one_to_one(m: &SparseMatrix) -> i64 {
    m.col_l1_all().into_iter().max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfToOneMode {
    Exact,
    Bounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InfToOne {
    Exact { value: i128, u: Vec<i64>, v: Vec<i64> },
    Bounds { lower: i128, upper: f64, u: Vec<i64>, v: Vec<i64> },
}

impl InfToOne {
    pub fn lower(&self) -> i128 {
        match self {
            Self::Exact { value, .. } => *value,
            Self::Bounds { lower, .. } => *lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match self {
            Self::Exact { value, .. } => *value as f64,
            Self::Bounds { upper, .. } => *upper,
        }
    }
}

fn sign_of(x: i64) -> i64 {
    if x < 0 {
        -1
    } else {
        1
    }
}

/// `max_{u, v in {±1}^d} u^T M v`.
///
/// Exact mode scans `u` with `u_0 = +1` in Gray-code order, keeping `M^T u`
/// up to date, and takes `v = sign(M^T u)` with ties to `+1`. Bounds mode
/// returns a local-search lower bound (alternating sign updates from the
/// supplied starts and from random ones) and the upper bound
/// `min(d ||M||_2, sum_i ||M(i, .)||_1)`.
pub fn norm_inf_to_1(
    m: &SparseMatrix,
    mode: InfToOneMode,
    starts: &[Vec<i64>],
    opts: &SpectralOptions,
) -> Result<InfToOne> {
    let d = m.dim();
    match mode {
        InfToOneMode::Exact => {
            if d > EXACT_INF_TO_ONE_LIMIT {
                return Err(Error::EnumerationLimit {
                    what: "dimension for exact inf-to-1 norm",
                    got: d,
                    limit: EXACT_INF_TO_ONE_LIMIT,
                });
            }
            if d == 0 {
                return Ok(InfToOne::Exact { value: 0, u: vec![], v: vec![] });
            }
            let rows: Vec<Vec<(usize, i64)>> = (0..d).map(|i| m.row(i).collect()).collect();
            let mut u = vec![1i64; d];
            let mut w = m.mul_transpose(&u);
            let score = |w: &[i64]| w.iter().map(|x| x.unsigned_abs() as i128).sum::<i128>();
            let (mut best, mut best_u) = (score(&w), u.clone());
            for step in 1u64..1 << (d - 1) {
                let k = step.trailing_zeros() as usize + 1;
                for &(j, v) in &rows[k] {
                    w[j] -= 2 * u[k] * v;
                }
                u[k] = -u[k];
                let s = score(&w);
                if s > best {
                    best = s;
                    best_u = u.clone();
                }
            }
            let v = m.mul_transpose(&best_u).into_iter().map(sign_of).collect();
            Ok(InfToOne::Exact { value: best, u: best_u, v })
        }
        InfToOneMode::Bounds => {
            let mut rng = substream(opts.seed, tag::NORMS, 0, 0);
            let mut candidates: Vec<Vec<i64>> = starts.iter().filter(|s| s.len() == d).cloned().collect();
            candidates.extend((0..16).map(|_| (0..d).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()));
            let (mut lower, mut best_u, mut best_v) = (i128::MIN, vec![1; d], vec![1; d]);
            for u0 in candidates {
                let (val, u, v) = alternate(m, u0);
                if val > lower {
                    (lower, best_u, best_v) = (val, u, v);
                }
            }
            let spectral = norm_spectral(m, opts).value;
            let row_sum: i64 = m.row_l1_all().iter().sum();
            Ok(InfToOne::Bounds {
                lower: lower.max(0),
                upper: (d as f64 * spectral).min(row_sum as f64),
                u: best_u,
                v: best_v,
            })
        }
    }
}

/// Alternating maximisation: `v = sign(M^T u)`, `u = sign(M v)` until stable.
fn alternate(m: &SparseMatrix, mut u: Vec<i64>) -> (i128, Vec<i64>, Vec<i64>) {
    let mut best = i128::MIN;
    loop {
        let v: Vec<i64> = m.mul_transpose(&u).into_iter().map(sign_of).collect();
        let val = m.bilinear(&u, &v);
        if val <= best {
            return (best, u, v);
        }
        best = val;
        let mv: Vec<i64> = (0..m.dim()).map(|i| m.row(i).map(|(j, x)| x * v[j]).sum()).collect();
        let next: Vec<i64> = mv.into_iter().map(sign_of).collect();
        if m.bilinear(&next, &v) <= val {
            return (val, u, v);
        }
        u = next;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub dim: usize,
    pub spectral: SpectralNorm,
    pub inf_to_1: InfToOne,
    pub one_to_one: i64,
}

impl NormReport {
    /// `||M||_{inf->1} <= d ||M||_2` and, for symmetric `M`,
    /// `||M||_2 <= ||M||_{1->1}`, at relative tolerance `1e-6`.
    pub fn simple_inequalities_hold(&self, symmetric: bool) -> bool {
        let tol = 1e-6 * (1.0 + self.spectral.value);
        let first = self.inf_to_1.lower() as f64 <= self.dim as f64 * self.spectral.value * (1.0 + 1e-6) + tol;
        let second = !symmetric || self.spectral.value <= self.one_to_one as f64 * (1.0 + 1e-6) + tol;
        first && second
    }
}

/// Exact `inf->1` when `dim <= 24`, bounds otherwise.
pub fn norm_report(m: &SparseMatrix, opts: &SpectralOptions) -> Result<NormReport> {
    let mode = if m.dim() <= EXACT_INF_TO_ONE_LIMIT {
        InfToOneMode::Exact
    } else {
        InfToOneMode::Bounds
    };
    Ok(NormReport {
        dim: m.dim(),
        spectral: norm_spectral(m, opts),
        inf_to_1: norm_inf_to_1(m, mode, &[], opts)?,
        one_to_one: norm_one_to_one(m),
    })
}
