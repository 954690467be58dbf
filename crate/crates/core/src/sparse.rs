//! Compressed-row symmetric matrices and a thin wrapper over faer's sparse Cholesky.

use faer::linalg::solvers::Solve;
use faer::sparse::{linalg::solvers::Llt, SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Square sparse matrix in CSR form with sorted, duplicate-free columns per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut t: Vec<(usize, usize, f64)> = triplets.to_vec();
        t.sort_unstable_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &t {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&j) {
            Ok(p) => self.vals[a + p],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * x[j]).sum::<f64>()).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    /// Largest absolute entry of `A - A^T`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Maximum absolute row sum (equals the 1-norm for symmetric matrices).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Entries `(local_row, local_col, value)` of the block `rows x cols`, where
    /// `local[v]` maps a global index to its position in the block (or `None`).
    pub fn block_triplets(
        &self,
        rows: &[usize],
        col_local: &[Option<usize>],
    ) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (li, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if let Some(lj) = col_local[j] {
                    out.push((li, lj, v));
                }
            }
        }
        out
    }
}

/// Sparse Cholesky factorization of a symmetric positive-definite matrix given by
/// its triplets (both triangles).
pub struct SparseCholesky {
    n: usize,
    llt: Llt<usize, f64>,
}

impl SparseCholesky {
    pub fn factor(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let t: Vec<Triplet<usize, usize, f64>> =
            triplets.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t)
            .map_err(|e| Error::InvalidParameter(format!("sparse assembly failed: {e:?}")))?;
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Factorization(format!("matrix is not positive definite ({e:?})")))?;
        Ok(SparseCholesky { n, llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves for every column of `rhs` (column-major, `n` rows).
    pub fn solve_columns(&self, rhs: &[f64], ncols: usize) -> Vec<f64> {
        let b = Mat::<f64>::from_fn(self.n, ncols, |i, j| rhs[j * self.n + i]);
        let x = self.llt.solve(&b);
        let mut out = vec![0.0; self.n * ncols];
        for j in 0..ncols {
            for i in 0..self.n {
                out[j * self.n + i] = x[(i, j)];
            }
        }
        out
    }
}
