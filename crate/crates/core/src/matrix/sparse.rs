use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Square integer matrix with one ordered map per row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<BTreeMap<usize, i64>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![BTreeMap::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.add(i, i, 1);
        }
        m
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), rows.len(), "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                m.add(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i].get(&j).copied().unwrap_or(0)
    }

    /// Adds `v` at `(i, j)`, dropping the entry if it cancels to zero.
    pub fn add(&mut self, i: usize, j: usize, v: i64) {
        if v == 0 {
            return;
        }
        let e = self.rows[i].entry(j).or_insert(0);
        *e += v;
        if *e == 0 {
            self.rows[i].remove(&j);
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.rows[i].iter().map(|(&j, &v)| (j, v))
    }

    /// Nonzero entries sorted by `(row, col)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(&j, &v)| (i, j, v)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    pub fn row_l1(&self, i: usize) -> i64 {
        self.rows[i].values().map(|v| v.abs()).sum()
    }

    pub fn row_l1_all(&self) -> Vec<i64> {
        (0..self.dim).map(|i| self.row_l1(i)).collect()
    }

    pub fn col_l1_all(&self) -> Vec<i64> {
        let mut out = vec![0; self.dim];
        for (_, j, v) in self.entries() {
            out[j] += v.abs();
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(i, j, v)| self.get(j, i) == v)
    }

    pub fn scaled(&self, c: i64) -> Self {
        let mut out = Self::zeros(self.dim);
        for (i, j, v) in self.entries() {
            out.add(i, j, c * v);
        }
        out
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &Self, c: i64) {
        assert_eq!(self.dim, other.dim);
        for (i, j, v) in other.entries() {
            self.add(i, j, c * v);
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, -1);
        out
    }

    /// `u^T M v` in exact arithmetic.
    pub fn bilinear(&self, u: &[i64], v: &[i64]) -> i128 {
        self.entries()
            .map(|(i, j, m)| u[i] as i128 * m as i128 * v[j] as i128)
            .sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(&j, &v)| v as f64 * x[j]).sum())
            .collect()
    }

    /// `M^T u`
    pub fn mul_transpose(&self, u: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.dim];
        for (i, j, v) in self.entries() {
            out[j] += v * u[i];
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.entries() {
            d[(i, j)] = v as f64;
        }
        d
    }

    /// Writes `header` then one `row col value` line per nonzero entry.
    pub fn write_entries<W: Write>(&self, header: &str, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        for (i, j, v) in self.entries() {
            writeln!(w, "{i} {j} {v}")?;
        }
        Ok(())
    }
}
