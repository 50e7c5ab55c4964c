use std::io::Write;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::indexer::choose;
use super::norms::{norm_inf_to_1, InfToOne, InfToOneMode, SpectralOptions, EXACT_INF_TO_ONE_LIMIT};
use super::{SparseMatrix, SubsetIndexer};
use crate::counting::DifferenceSequence;
use crate::discrepancy::{IndexPartition, SignVector};
use crate::error::{Error, Result};
use crate::group::{is_good_pair, single_support, Group};

pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

/// A subset-indexed matrix together with the parameters it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    pub indexer: SubsetIndexer,
    pub r: usize,
    pub matrix: SparseMatrix,
    pub symmetric: bool,
}

impl EmbeddingMatrix {
    pub fn dim(&self) -> usize {
        self.indexer.total()
    }

    /// Header `dim N s r`, then `row col value` sorted by `(row, col)`.
    pub fn write_dump<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let header = format!(
            "{} {} {} {}",
            self.dim(),
            self.indexer.ground(),
            self.indexer.subset_size(),
            self.r
        );
        self.matrix.write_entries(&header, w)
    }
}

/// `floor(N^{1 - 2/k})`
pub fn default_subset_size(n: usize, k: usize) -> usize {
    let v = (n as f64).powf(1.0 - 2.0 / k as f64);
    (v + 1e-9).floor() as usize
}

/// `(ln N)^k m / N^{1 - 2/k}`
pub fn default_prune_threshold(n: usize, k: usize, m: usize) -> f64 {
    let n = n as f64;
    n.ln().powi(k as i32) * m as f64 / n.powf(1.0 - 2.0 / k as f64)
}

/// `C(2r, r)^2 C(N - 4r, s - 2r)`, the number of `(S, T)` pairs each `x`
/// contributes to a good `M_ij`.
pub fn pairs_per_point(n: usize, s: usize, r: usize) -> u128 {
    let c = choose(2 * r, r);
    if n < 4 * r || s < 2 * r {
        return 0;
    }
    c * c * choose(n - 4 * r, s - 2 * r)
}

fn check_embedding(ds: &DifferenceSequence, s: usize, r: usize, cap: usize) -> Result<SubsetIndexer> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    if s < 2 * r {
        return Err(Error::SubsetSizeTooSmall { s, r });
    }
    SubsetIndexer::new(ds.group().modulus(), s, cap)
}

/// `M_ij(S, T) = #{x : |S ∩ P_i(x)| = |S ∩ P_j(x)| = r, S Δ T = P_ij(x)}`
/// for a good pair, the zero matrix otherwise. Built by generating, for each
/// `x`, the `C(2r,r)^2 C(N-4r, s-2r)` admissible `S` and their partners `T`.
pub fn build_mij(
    ds: &DifferenceSequence,
    i: usize,
    j: usize,
    s: usize,
    r: usize,
    cap: usize,
) -> Result<EmbeddingMatrix> {
    let indexer = check_embedding(ds, s, r, cap)?;
    let g = ds.group();
    let (di, dj) = (ds.entries()[i], ds.entries()[j]);
    let mut matrix = SparseMatrix::zeros(indexer.total());
    if is_good_pair(g, di, dj, r) {
        for x in g.elements() {
            let pi: Vec<usize> = single_support(g, x, di, r).into_iter().collect();
            let pj: Vec<usize> = single_support(g, x, dj, r).into_iter().collect();
            let rest: Vec<usize> = g.elements().filter(|y| !pi.contains(y) && !pj.contains(y)).collect();
            for a in pi.iter().copied().combinations(r) {
                let a_c: Vec<usize> = pi.iter().copied().filter(|y| !a.contains(y)).collect();
                for b in pj.iter().copied().combinations(r) {
                    let b_c: Vec<usize> = pj.iter().copied().filter(|y| !b.contains(y)).collect();
                    for c in rest.iter().copied().combinations(s - 2 * r) {
                        let mut sset: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
                        let mut tset: Vec<usize> = a_c.iter().chain(&b_c).chain(&c).copied().collect();
                        sset.sort_unstable();
                        tset.sort_unstable();
                        matrix.add(indexer.rank(&sset), indexer.rank(&tset), 1);
                    }
                }
            }
        }
    }
    Ok(EmbeddingMatrix {
        indexer,
        r,
        matrix,
        symmetric: true,
    })
}

/// `Z^{⊙s}(S) = prod_{y in S} Z(y)` in rank order.
pub fn lift(z: &SignVector, indexer: &SubsetIndexer) -> Vec<i64> {
    (0..indexer.total())
        .map(|rank| indexer.unrank(rank).iter().map(|&y| z.get(y)).product())
        .collect()
}

/// `sum_x prod_{y in P_ij(x)} Z(y)`
pub fn support_sign_sum(g: &Group, di: usize, dj: usize, r: usize, z: &SignVector) -> i64 {
    g.elements()
        .map(|x| {
            let pi = single_support(g, x, di, r);
            let pj = single_support(g, x, dj, r);
            pi.union(&pj).map(|&y| z.get(y)).product::<i64>()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MstzCheck {
    pub good_pair: bool,
    /// `(Z^{⊙s})^T M_ij Z^{⊙s}`
    pub lhs: i128,
    /// `C(2r,r)^2 C(N-4r,s-2r) sum_x prod_{y in P_ij(x)} Z(y)`, zero for a bad pair
    pub rhs: i128,
    pub holds: bool,
}

pub fn verify_mstz_identity(
    ds: &DifferenceSequence,
    i: usize,
    j: usize,
    s: usize,
    r: usize,
    z: &SignVector,
    cap: usize,
) -> Result<MstzCheck> {
    let m = build_mij(ds, i, j, s, r, cap)?;
    let g = ds.group();
    let lifted = lift(z, &m.indexer);
    let lhs = m.matrix.bilinear(&lifted, &lifted);
    let (di, dj) = (ds.entries()[i], ds.entries()[j]);
    let good_pair = is_good_pair(g, di, dj, r);
    let rhs = if good_pair {
        pairs_per_point(g.modulus(), s, r) as i128 * support_sign_sum(g, di, dj, r, z) as i128
    } else {
        0
    };
    Ok(MstzCheck {
        good_pair,
        lhs,
        rhs,
        holds: lhs == rhs,
    })
}

/// `M_i^tau = sum_b tau_b M_{i, right[b]}`
pub fn aggregate_mi_tau(
    ds: &DifferenceSequence,
    i: usize,
    tau: &SignVector,
    right: &[usize],
    s: usize,
    r: usize,
    cap: usize,
) -> Result<EmbeddingMatrix> {
    if tau.len() != right.len() {
        return Err(Error::InvalidParameter("tau does not match the right block".into()));
    }
    let indexer = check_embedding(ds, s, r, cap)?;
    let parts = right
        .par_iter()
        .map(|&j| build_mij(ds, i, j, s, r, cap))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = SparseMatrix::zeros(indexer.total());
    for (b, m) in parts.iter().enumerate() {
        matrix.add_scaled(&m.matrix, tau.get(b));
    }
    Ok(EmbeddingMatrix {
        indexer,
        r,
        matrix,
        symmetric: true,
    })
}

/// Zeroes every row and column whose `l1` weight is at least `threshold`.
/// Returns the pruned matrix and the zeroed indices.
pub fn prune(m: &EmbeddingMatrix, threshold: f64) -> (EmbeddingMatrix, Vec<usize>) {
    let heavy: Vec<usize> = m
        .matrix
        .row_l1_all()
        .into_iter()
        .enumerate()
        .filter(|&(_, w)| w as f64 >= threshold)
        .map(|(i, _)| i)
        .collect();
    let mut is_heavy = vec![false; m.dim()];
    heavy.iter().for_each(|&i| is_heavy[i] = true);
    let mut matrix = SparseMatrix::zeros(m.dim());
    for (i, j, v) in m.matrix.entries() {
        if !is_heavy[i] && !is_heavy[j] {
            matrix.add(i, j, v);
        }
    }
    (
        EmbeddingMatrix {
            matrix,
            ..m.clone()
        },
        heavy,
    )
}

/// `sum_i ||(M - M')(i, .)||_1`, an upper bound on `||M - M'||_{inf->1}`.
pub fn prune_distance(m: &SparseMatrix, pruned: &SparseMatrix) -> Result<i64> {
    if m.dim() != pruned.dim() {
        return Err(Error::InvalidParameter("matrices differ in dimension".into()));
    }
    Ok(m.sub(pruned).row_l1_all().iter().sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub dim: usize,
    pub good_pairs: usize,
    /// `(Z^{⊙s})^T (sum sigma_i tau_j M_ij) Z^{⊙s}`
    pub quadratic: i128,
    /// `C(2r,r)^2 C(N-4r,s-2r) sum_{good (i,j)} sigma_i tau_j sum_x prod_{P_ij(x)} Z`
    pub rhs: i128,
    pub inf_to_1: InfToOne,
    pub identity_holds: bool,
    pub inequality_holds: bool,
}

impl ChainCheck {
    pub fn holds(&self) -> bool {
        self.identity_holds && self.inequality_holds
    }
}

/// `||sum sigma_i tau_j M_ij||_{inf->1} >= (Z^{⊙s})^T (sum sigma_i tau_j M_ij) Z^{⊙s}`
/// and the exact evaluation of the middle term. The norm is exact up to
/// dimension 24; above that the local-search lower bound is seeded with the
/// lifted vector and the upper bound is checked as well.
#[allow(clippy::too_many_arguments)]
pub fn verify_lower_bound_chain(
    ds: &DifferenceSequence,
    part: &IndexPartition,
    sigma: &SignVector,
    tau: &SignVector,
    s: usize,
    r: usize,
    z: &SignVector,
    cap: usize,
    opts: &SpectralOptions,
) -> Result<ChainCheck> {
    if sigma.len() != part.left().len() || tau.len() != part.right().len() || part.len() != ds.len() {
        return Err(Error::InvalidParameter("signs do not match the partition".into()));
    }
    let indexer = check_embedding(ds, s, r, cap)?;
    let g = ds.group();
    let pairs: Vec<(usize, usize, i64)> = part
        .left()
        .iter()
        .enumerate()
        .flat_map(|(a, &i)| {
            part.right()
                .iter()
                .enumerate()
                .map(move |(b, &j)| (i, j, sigma.get(a) * tau.get(b)))
        })
        .collect();
    let built = pairs
        .par_iter()
        .map(|&(i, j, _)| build_mij(ds, i, j, s, r, cap))
        .collect::<Result<Vec<_>>>()?;
    let mut total = SparseMatrix::zeros(indexer.total());
    for (m, &(_, _, c)) in built.iter().zip(&pairs) {
        total.add_scaled(&m.matrix, c);
    }
    let lifted = lift(z, &indexer);
    let quadratic = total.bilinear(&lifted, &lifted);
    let mut good_pairs = 0;
    let mut signed = 0i128;
    for &(i, j, c) in &pairs {
        let (di, dj) = (ds.entries()[i], ds.entries()[j]);
        if is_good_pair(g, di, dj, r) {
            good_pairs += 1;
            signed += c as i128 * support_sign_sum(g, di, dj, r, z) as i128;
        }
    }
    let rhs = pairs_per_point(g.modulus(), s, r) as i128 * signed;
    let mode = if indexer.total() <= EXACT_INF_TO_ONE_LIMIT {
        InfToOneMode::Exact
    } else {
        InfToOneMode::Bounds
    };
    let inf_to_1 = norm_inf_to_1(&total, mode, &[lifted], opts)?;
    let inequality_holds = inf_to_1.lower() >= quadratic && inf_to_1.upper() + 1e-6 * (1.0 + inf_to_1.upper()) >= quadratic as f64;
    Ok(ChainCheck {
        dim: indexer.total(),
        good_pairs,
        quadratic,
        rhs,
        inf_to_1,
        identity_holds: quadratic == rhs,
        inequality_holds,
    })
}
