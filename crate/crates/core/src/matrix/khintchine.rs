use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norms::dense_spectral;
use crate::error::{Error, Result};
use crate::rng::{child_seed, substream, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KhintchineReport {
    pub dim: usize,
    pub count: usize,
    pub trials: usize,
    /// Mean of `||sum_i sigma_i A_i||_2` over the draws.
    pub mean: f64,
    pub max: f64,
    /// `10 sqrt(ln d) (sum_i ||A_i||_2^2)^{1/2}`
    pub bound: f64,
    pub ratio: f64,
    pub max_ratio: f64,
    pub all_within: bool,
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    m.is_square() && (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

/// Random-sign sums `sum_i sigma_i A_i` against the Khintchine bound.
pub fn khintchine_bench<R: Rng + ?Sized>(
    mats: &[DMatrix<f64>],
    trials: usize,
    rng: &mut R,
) -> Result<KhintchineReport> {
    let first = mats
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one matrix".into()))?;
    let d = first.nrows();
    if d < 2 {
        return Err(Error::Precondition("dimension must be at least 2".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if mats.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::InvalidParameter("matrices must share one square dimension".into()));
    }
    let symmetric = mats.iter().all(is_symmetric);
    let squares: f64 = mats.iter().map(|m| dense_spectral(m, symmetric).powi(2)).sum();
    let bound = 10.0 * (d as f64).ln().sqrt() * squares.sqrt();
    let seed = child_seed(rng);
    let norms: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut local = substream(seed, tag::KHINTCHINE, 0, t as u64);
            let mut sum = DMatrix::zeros(d, d);
            for m in mats {
                if local.random::<bool>() {
                    sum += m;
                } else {
                    sum -= m;
                }
            }
            dense_spectral(&sum, symmetric)
        })
        .collect();
    let mean = norms.iter().sum::<f64>() / trials as f64;
    let max = norms.iter().copied().fold(0.0, f64::max);
    Ok(KhintchineReport {
        dim: d,
        count: mats.len(),
        trials,
        mean,
        max,
        bound,
        ratio: mean / bound,
        max_ratio: max / bound,
        all_within: max <= bound,
    })
}

/// `n` symmetric `d x d` matrices with independent entries uniform in `[-1, 1]`.
pub fn random_symmetric_family<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Vec<DMatrix<f64>> {
    (0..n)
        .map(|_| {
            let mut m = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..=i {
                    let v = rng.random_range(-1.0..=1.0);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            m
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_matrix() {
        let mut rng = substream(1, tag::VERIFY, 0, 0);
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        let r = khintchine_bench(std::slice::from_ref(&a), 20, &mut rng).unwrap();
        assert!((r.mean - 3.0).abs() < 1e-12);
        assert!((r.ratio - 1.0 / (10.0 * 3f64.ln().sqrt())).abs() < 1e-12);
    }

    #[test]
    fn diagonal_units() {
        let mut rng = substream(2, tag::VERIFY, 0, 0);
        let d = 8;
        let units: Vec<DMatrix<f64>> = (0..d)
            .map(|i| {
                let mut m = DMatrix::zeros(d, d);
                m[(i, i)] = 1.0;
                m
            })
            .collect();
        let r = khintchine_bench(&units, 50, &mut rng).unwrap();
        assert!((r.mean - 1.0).abs() < 1e-12 && (r.max - 1.0).abs() < 1e-12);
        assert!((r.bound - 10.0 * (d as f64 * (d as f64).ln()).sqrt()).abs() < 1e-9);
        assert!(r.ratio < 0.1);
    }

    #[test]
    fn random_families_within_bound() {
        let mut rng = substream(3, tag::VERIFY, 0, 0);
        for (d, n) in [(2, 1), (8, 4), (16, 32), (32, 8)] {
            let fam = random_symmetric_family(d, n, &mut rng);
            let r = khintchine_bench(&fam, 20, &mut rng).unwrap();
            assert!(r.all_within && r.ratio <= 1.0);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut rng = substream(4, tag::VERIFY, 0, 0);
        assert!(khintchine_bench(&[DMatrix::zeros(1, 1)], 5, &mut rng).is_err());
        assert!(khintchine_bench(&[DMatrix::zeros(2, 2), DMatrix::zeros(3, 3)], 5, &mut rng).is_err());
        assert!(khintchine_bench(&[], 5, &mut rng).is_err());
    }
}
