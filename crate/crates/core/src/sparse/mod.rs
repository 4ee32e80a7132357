//! Compressed sparse row storage and the kernels the multigrid cycle needs.

mod matrix_market;
pub(crate) mod smoother;

pub use matrix_market::{read_matrix_market, write_matrix_market, write_vector};
pub use smoother::{gauss_seidel_sweep, jacobi_sweep, SweepDirection, DEFAULT_JACOBI_DAMPING};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::par;

/// Rows shorter than this are multiplied sequentially even with `parallel` on.
const PAR_SPMV_MIN_ROWS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking the structural invariants:
    /// monotone offsets, sorted unique column indices per row, indices in range.
    pub fn try_new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::DimensionMismatch(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 || *row_offsets.last().unwrap() != col_indices.len() {
            return Err(Error::DimensionMismatch("row_offsets do not span col_indices".into()));
        }
        if col_indices.len() != values.len() {
            return Err(Error::DimensionMismatch("col_indices and values differ in length".into()));
        }
        for r in 0..n_rows {
            let (s, e) = (row_offsets[r], row_offsets[r + 1]);
            if s > e {
                return Err(Error::DimensionMismatch(format!("row_offsets decrease at row {r}")));
            }
            let cols = &col_indices[s..e];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::DimensionMismatch(format!("row {r}: columns not sorted/unique")));
            }
            if cols.last().is_some_and(|&c| c >= n_cols) {
                return Err(Error::DimensionMismatch(format!("row {r}: column out of range")));
            }
        }
        Ok(Self { n_rows, n_cols, row_offsets, col_indices, values })
    }

    /// Sums duplicate `(row, col)` entries. Duplicates are added in the order
    /// they appear in `triplets`, so the result is reproducible bit for bit.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= n_rows || c >= n_cols) {
            return Err(Error::DimensionMismatch(format!(
                "triplet ({r}, {c}) outside {n_rows}x{n_cols}"
            )));
        }
        // counting sort by row keeps insertion order within a row
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for r in 0..n_rows {
            counts[r + 1] += counts[r];
        }
        let mut next = counts.clone();
        let mut by_row = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            by_row[next[r]] = (c, v);
            next[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for r in 0..n_rows {
            let row = &mut by_row[counts[r]..counts[r + 1]];
            // stable: equal columns keep insertion order
            row.sort_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut sum = 0.0;
                while i < row.len() && row[i].0 == c {
                    sum += row[i].1;
                    i += 1;
                }
                col_indices.push(c);
                values.push(sum);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { n_rows, n_cols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut triplets = Vec::new();
        for i in 0..a.n_rows() {
            for j in 0..a.n_cols() {
                let v = a[(i, j)];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.n_rows(), a.n_cols(), &triplets).expect("indices in range")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }

    /// Entry `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `y = A x`, each row summed left to right.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_cols || y.len() != self.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "spmv: {}x{} matrix, x of length {}, y of length {}",
                self.n_rows,
                self.n_cols,
                x.len(),
                y.len()
            )));
        }
        let row_dot = |r: usize| {
            let (s, e) = (self.row_offsets[r], self.row_offsets[r + 1]);
            self.col_indices[s..e]
                .iter()
                .zip(&self.values[s..e])
                .fold(0.0, |acc, (&c, &v)| acc + v * x[c])
        };
        if self.n_rows >= PAR_SPMV_MIN_ROWS {
            par::fill_indexed(y, row_dot);
        } else {
            y.iter_mut().enumerate().for_each(|(r, yr)| *yr = row_dot(r));
        }
        Ok(())
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = Aᵀ x` by column scatter, without forming the transpose.
    pub fn spmv_transpose_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_rows || y.len() != self.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "spmv_transpose: {}x{} matrix, x of length {}, y of length {}",
                self.n_rows,
                self.n_cols,
                x.len(),
                y.len()
            )));
        }
        y.iter_mut().for_each(|v| *v = 0.0);
        for (r, &xr) in x.iter().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * xr;
            }
        }
        Ok(())
    }

    pub fn spmv_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_cols];
        self.spmv_transpose_into(x, &mut y)?;
        Ok(y)
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // rows visited in ascending order, so transposed rows come out sorted
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                col_indices[next[c]] = r;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// Sparse product `self * other` (Gustavson, dense accumulator per row).
    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "matmul: {}x{} times {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut acc = vec![0.0; other.n_cols];
        let mut marker = vec![usize::MAX; other.n_cols];
        let mut row_cols: Vec<usize> = Vec::new();
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for r in 0..self.n_rows {
            row_cols.clear();
            let (cols, vals) = self.row(r);
            for (&k, &a) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(k);
                for (&c, &b) in ocols.iter().zip(ovals) {
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = 0.0;
                        row_cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            row_cols.sort_unstable();
            for &c in &row_cols {
                col_indices.push(c);
                values.push(acc[c]);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Galerkin triple product `Pᵀ A P` with `self` as `A`.
    pub fn galerkin_product(&self, p: &CsrMatrix) -> Result<CsrMatrix> {
        let ap = self.matmul(p)?;
        p.transpose().matmul(&ap)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F / ‖other‖_F`, comparing over the union of patterns.
    pub fn relative_difference(&self, other: &CsrMatrix) -> Result<f64> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut diff2 = 0.0;
        for r in 0..self.n_rows {
            let (ca, va) = self.row(r);
            let (cb, vb) = other.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ca.len() || j < cb.len() {
                let d = match (ca.get(i), cb.get(j)) {
                    (Some(&a), Some(&b)) if a == b => {
                        i += 1;
                        j += 1;
                        va[i - 1] - vb[j - 1]
                    }
                    (Some(&a), Some(&b)) if a < b => {
                        i += 1;
                        va[i - 1]
                    }
                    (Some(_), None) => {
                        i += 1;
                        va[i - 1]
                    }
                    _ => {
                        j += 1;
                        vb[j - 1]
                    }
                };
                diff2 += d * d;
            }
        }
        let norm = other.frobenius_norm();
        Ok(if norm == 0.0 { diff2.sqrt() } else { diff2.sqrt() / norm })
    }

    /// Largest `|a_ij − a_ji|`; zero for an exactly symmetric matrix.
    pub fn max_asymmetry(&self) -> f64 {
        if self.n_rows != self.n_cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d[(r, c)] = v;
            }
        }
        d
    }

    /// Number of stored entries in row `r`.
    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_offsets[r + 1] - self.row_offsets[r]
    }
}
