//! Compressed sparse row storage for the assembled operators.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid_arg, invalid_input, Result};

/// Rows below this count are multiplied sequentially.
const PAR_ROWS: usize = 4096;

/// General rectangular CSR matrix with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub ptr: Vec<usize>,
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Sums duplicate entries; explicit zeros produced by cancellation are kept.
    pub fn from_triplets(rows: usize, cols: usize, mut t: Vec<(u32, u32, f64)>) -> Self {
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut ptr = vec![0usize; rows + 1];
        let mut idx = Vec::with_capacity(t.len());
        let mut val: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(u32, u32)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                ptr[i as usize + 1] += 1;
                idx.push(j);
                val.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            ptr[i + 1] += ptr[i];
        }
        Self {
            rows,
            cols,
            ptr,
            idx,
            val,
        }
    }

    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.ptr[i]..self.ptr[i + 1];
        (&self.idx[r.clone()], &self.val[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, val) = self.row(i);
        match idx.binary_search(&(j as u32)) {
            Ok(p) => val[p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, &v)| v * x[j as usize]).sum()
    }

    /// `y = A x`, summing each row in column order.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        if self.rows >= PAR_ROWS {
            y.par_iter_mut()
                .with_min_len(1024)
                .enumerate()
                .for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(i, x);
            }
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.mul_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Csr {
        let mut count = vec![0usize; self.cols + 1];
        for &j in &self.idx {
            count[j as usize + 1] += 1;
        }
        for j in 0..self.cols {
            count[j + 1] += count[j];
        }
        let ptr = count.clone();
        let mut next = count;
        let mut idx = vec![0u32; self.nnz()];
        let mut val = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            let (ri, rv) = self.row(i);
            for (&j, &v) in ri.iter().zip(rv) {
                let slot = next[j as usize];
                idx[slot] = i as u32;
                val[slot] = v;
                next[j as usize] += 1;
            }
        }
        Csr {
            rows: self.cols,
            cols: self.rows,
            ptr,
            idx,
            val,
        }
    }

    /// Sparse product `self · other` (Gustavson, dense accumulator per row).
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.cols, other.rows);
        let compute_rows = |range: std::ops::Range<usize>| {
            let mut acc = vec![0.0f64; other.cols];
            let mut mark = vec![usize::MAX; other.cols];
            let mut cols: Vec<u32> = Vec::new();
            let mut out: Vec<(Vec<u32>, Vec<f64>)> = Vec::with_capacity(range.len());
            for i in range {
                cols.clear();
                let (ai, av) = self.row(i);
                for (&k, &a) in ai.iter().zip(av) {
                    let (bi, bv) = other.row(k as usize);
                    for (&j, &b) in bi.iter().zip(bv) {
                        let j = j as usize;
                        if mark[j] != i {
                            mark[j] = i;
                            acc[j] = 0.0;
                            cols.push(j as u32);
                        }
                        acc[j] += a * b;
                    }
                }
                cols.sort_unstable();
                let vals = cols.iter().map(|&j| acc[j as usize]).collect();
                out.push((cols.clone(), vals));
            }
            out
        };
        let chunk = 2048;
        let starts: Vec<usize> = (0..self.rows).step_by(chunk).collect();
        let pieces: Vec<Vec<(Vec<u32>, Vec<f64>)>> = starts
            .par_iter()
            .map(|&s| compute_rows(s..(s + chunk).min(self.rows)))
            .collect();
        let mut ptr = Vec::with_capacity(self.rows + 1);
        ptr.push(0);
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (c, v) in pieces.into_iter().flatten() {
            idx.extend(c);
            val.extend(v);
            ptr.push(idx.len());
        }
        Csr {
            rows: self.rows,
            cols: other.cols,
            ptr,
            idx,
            val,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (ri, rv) = self.row(i);
            for (&j, &v) in ri.iter().zip(rv) {
                m[(i, j as usize)] += v;
            }
        }
        m
    }
}

/// Symmetric sparse matrix, stored with both triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetricOperator {
    csr: Csr,
}

impl SparseSymmetricOperator {
    /// Assembles from `(row, col, value)` entries. Repeated coordinates are
    /// summed; the result must be exactly symmetric.
    pub fn from_triplets(dim: usize, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut t = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(invalid_arg(format!("entry ({i}, {j}) outside a {dim}x{dim} operator")));
            }
            if !v.is_finite() {
                return Err(invalid_input(format!("entry ({i}, {j}) is not finite")));
            }
            t.push((i as u32, j as u32, v));
        }
        let csr = Csr::from_triplets(dim, dim, t);
        for i in 0..dim {
            let (ri, rv) = csr.row(i);
            for (&j, &v) in ri.iter().zip(rv) {
                if csr.get(j as usize, i) != v {
                    return Err(invalid_input(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        Ok(Self { csr })
    }

    /// Diagonal operator.
    pub fn diagonal_matrix(values: Vec<f64>) -> Result<Self> {
        let t = values.into_iter().enumerate().map(|(i, v)| (i, i, v)).collect::<Vec<_>>();
        let dim = t.len();
        Self::from_triplets(dim, t)
    }

    pub(crate) fn from_csr(csr: Csr) -> Self {
        debug_assert_eq!(csr.rows, csr.cols);
        Self { csr }
    }

    pub(crate) fn csr(&self) -> &Csr {
        &self.csr
    }

    pub fn dim(&self) -> usize {
        self.csr.rows
    }

    /// Stored entries, counting both triangles.
    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.csr.get(i, j)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.csr.diagonal()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim()).all(|i| self.csr.row(i).0.iter().all(|&j| j as usize == i))
    }

    /// Entries in row-major order with sorted columns.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |i| {
            let (ri, rv) = self.csr.row(i);
            ri.iter().zip(rv).map(move |(&j, &v)| (i, j as usize, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.csr.row(i).1.iter().sum()).collect()
    }

    /// Sparse mat-vec with a fixed summation order within each row.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(invalid_arg(format!(
                "vector of length {} applied to a {}x{} operator",
                x.len(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(self.csr.mul(x))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.csr.to_dense()
    }

    /// Matrix Market coordinate format, lower triangle only.
    pub fn write_matrix_market<W: Write>(&self, w: &mut W) -> Result<()> {
        let lower: Vec<_> = self.triplets().filter(|&(i, j, _)| j <= i).collect();
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(w, "{} {} {}", self.dim(), self.dim(), lower.len())?;
        for (i, j, v) in lower {
            writeln!(w, "{} {} {v:.16e}", i + 1, j + 1)?;
        }
        Ok(())
    }
}
