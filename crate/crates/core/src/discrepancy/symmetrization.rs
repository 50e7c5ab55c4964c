use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::counting::{all_sequences, lambda_single, SubsetMask};
use crate::error::{Error, Result};
use crate::group::Group;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationReport {
    pub modulus: usize,
    pub m: usize,
    pub k: usize,
    /// `E_D max_A |Lambda_D(A) - Lambda_G(A)|`
    pub lhs: Ratio<i128>,
    /// `2 E_D E_sigma max_A |E_i E_x sigma_i prod_l 1_A(x + l d_i)|`
    pub rhs: Ratio<i128>,
    pub holds: bool,
}

const MAX_MODULUS: usize = 12;
const MAX_SEQUENCES: u128 = 1 << 16;

/// Both sides of the symmetrization inequality by full enumeration over
/// `D in G^m`, `sigma in {±1}^m` and every `A ⊆ G`.
pub fn symmetrization_check(g: &Group, m: usize, k: usize) -> Result<SymmetrizationReport> {
    let n = g.modulus();
    if m == 0 {
        return Err(Error::EmptyDifferences);
    }
    if n > MAX_MODULUS {
        return Err(Error::EnumerationLimit {
            what: "modulus for symmetrization",
            got: n,
            limit: MAX_MODULUS,
        });
    }
    let sequences = (n as u128).pow(m as u32) << m;
    if sequences > MAX_SEQUENCES {
        return Err(Error::EnumerationLimit {
            what: "N^m * 2^m",
            got: sequences.min(usize::MAX as u128) as usize,
            limit: MAX_SEQUENCES as usize,
        });
    }
    // counts[a][d] = #{x : x + l d in A for all l < k}
    let counts: Vec<Vec<i128>> = (0u64..1 << n)
        .map(|bits| {
            let a = SubsetMask::from_bits(g, bits);
            (0..n).map(|d| lambda_single(&a, d, k).numerator as i128).collect()
        })
        .collect();
    let total: Vec<i128> = counts.iter().map(|c| c.iter().sum()).collect();
    let (n_i, m_i) = (n as i128, m as i128);

    let mut lhs_sum = Ratio::from_integer(0i128);
    let mut rhs_sum = Ratio::from_integer(0i128);
    for ds in all_sequences(*g, m) {
        let d = ds.entries();
        // |sum_i c(d_i)/(mN) - sum_d c(d)/N^2| over the common denominator m N^2
        let dev = counts
            .iter()
            .zip(&total)
            .map(|(c, t)| (n_i * d.iter().map(|&di| c[di]).sum::<i128>() - m_i * t).abs())
            .max()
            .unwrap_or(0);
        lhs_sum += Ratio::new(dev, m_i * n_i * n_i);
        for signs in 0u32..1 << m {
            let best = counts
                .iter()
                .map(|c| {
                    d.iter()
                        .enumerate()
                        .map(|(i, &di)| if signs >> i & 1 == 1 { -c[di] } else { c[di] })
                        .sum::<i128>()
                        .abs()
                })
                .max()
                .unwrap_or(0);
            rhs_sum += Ratio::new(best, m_i * n_i);
        }
    }
    let draws = n_i.pow(m as u32);
    let lhs = lhs_sum / draws;
    let rhs = rhs_sum * 2 / (draws << m);
    Ok(SymmetrizationReport {
        modulus: n,
        m,
        k,
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}
