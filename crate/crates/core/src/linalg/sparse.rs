//! Compressed-sparse-row storage for the assembled Galerkin operators.

use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;
use crate::linalg::LinearOperator;

/// Real matrix in compressed-sparse-row form.
///
/// Column indices are strictly increasing inside each row and every stored
/// value is finite. Explicit zeros may be stored (they keep patterns stable
/// across time steps).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(i, j, v) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "triplet ({i}, {j}) outside {n_rows}x{n_cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite value at ({i}, {j})"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            let pos = next[i];
            cols[pos] = j;
            vals[pos] = v;
            next[i] += 1;
        }

        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n_rows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            scratch.sort_unstable_by_key(|&(c, _)| c);
            let mut iter = scratch.iter().peekable();
            while let Some(&(c, mut v)) = iter.next() {
                while let Some(&&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
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

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(dense: &DenseMatrix) -> Self {
        let mut triplets = Vec::new();
        for i in 0..dense.n_rows() {
            for j in 0..dense.n_cols() {
                let v = dense[(i, j)];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(dense.n_rows(), dense.n_cols(), &triplets)
            .expect("dense entries are in range")
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

    /// Iterates `(col, value)` over the stored entries of `row`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[row]..self.row_offsets[row + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_offsets[row]..self.row_offsets[row + 1];
        match self.col_indices[range.clone()].binary_search(&col) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            out.extend(self.row(i).map(|(j, v)| (i, j, v)));
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[p] * x[self.col_indices[p]];
            }
            *yi = acc;
        }
    }

    /// `y += alpha * A x`.
    pub fn mul_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[p] * x[self.col_indices[p]];
            }
            *yi += alpha * acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[p];
                let q = next[j];
                col_indices[q] = i;
                values[q] = self.values[p];
                next[j] += 1;
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

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Linear combination `sum_i coeffs[i] * mats[i]` of equally sized matrices.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<Self> {
        let Some(&(_, first)) = terms.first() else {
            return Err(Error::InvalidArgument("empty linear combination".into()));
        };
        let (n_rows, n_cols) = (first.n_rows, first.n_cols);
        let mut triplets = Vec::with_capacity(terms.iter().map(|(_, m)| m.nnz()).sum());
        for &(alpha, m) in terms {
            if m.n_rows != n_rows || m.n_cols != n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "{}x{} vs {}x{}",
                    m.n_rows, m.n_cols, n_rows, n_cols
                )));
            }
            for i in 0..m.n_rows {
                triplets.extend(m.row(i).map(|(j, v)| (i, j, alpha * v)));
            }
        }
        Self::from_triplets(n_rows, n_cols, &triplets)
    }

    /// Block-diagonal `diag(self, self)`, used to lift scalar P2 operators to
    /// two-component velocity operators.
    pub fn block_diag2(&self) -> Self {
        let mut triplets = Vec::with_capacity(2 * self.nnz());
        for (i, j, v) in self.triplets() {
            triplets.push((i, j, v));
            triplets.push((i + self.n_rows, j + self.n_cols, v));
        }
        Self::from_triplets(2 * self.n_rows, 2 * self.n_cols, &triplets)
            .expect("indices are in range")
    }

    /// Replaces the listed rows and columns with those of the identity: the
    /// diagonal entry becomes one and every other entry in the row and column
    /// is removed.
    pub fn with_identity_rows_cols(&self, constrained: &[bool]) -> Self {
        assert_eq!(constrained.len(), self.n_rows);
        assert_eq!(self.n_rows, self.n_cols);
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            if constrained[i] {
                triplets.push((i, i, 1.0));
                continue;
            }
            triplets.extend(
                self.row(i)
                    .filter(|&(j, _)| !constrained[j])
                    .map(|(j, v)| (i, j, v)),
            );
        }
        Self::from_triplets(self.n_rows, self.n_cols, &triplets).expect("indices are in range")
    }

    /// Drops stored entries whose row or column is flagged.
    pub fn without_rows_cols(&self, rows: Option<&[bool]>, cols: Option<&[bool]>) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            if rows.is_some_and(|r| r[i]) {
                continue;
            }
            triplets.extend(
                self.row(i)
                    .filter(|&(j, _)| !cols.is_some_and(|c| c[j]))
                    .map(|(j, v)| (i, j, v)),
            );
        }
        Self::from_triplets(self.n_rows, self.n_cols, &triplets).expect("indices are in range")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        let diff = SparseMatrix::linear_combination(&[(1.0, self), (-1.0, other)])
            .expect("matching dimensions");
        diff.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.n_rows == self.n_cols && self.max_abs_diff(&self.transpose()) <= tol
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n_rows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let m = SparseMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0)])
            .unwrap();
        assert_eq!(m.col_indices(), &[0, 2]);
        assert_eq!(m.values(), &[2.0, 4.0]);
        assert_eq!(m.row_offsets(), &[0, 2, 2]);
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, &[(0, 0, f64::NAN)]).is_err());
    }

    #[test]
    fn transpose_matches_dense() {
        let m = SparseMatrix::from_triplets(2, 3, &[(0, 1, 1.5), (1, 0, -2.0), (1, 2, 4.0)])
            .unwrap();
        let t = m.transpose();
        assert_eq!(t.to_dense(), m.to_dense().transpose());
    }

    #[test]
    fn identity_rows_cols() {
        let m = SparseMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, 4.0),
                (0, 1, 1.0),
                (1, 0, 1.0),
                (1, 1, 4.0),
                (1, 2, 1.0),
                (2, 1, 1.0),
                (2, 2, 4.0),
            ],
        )
        .unwrap();
        let e = m.with_identity_rows_cols(&[false, true, false]);
        assert_eq!(e.get(1, 1), 1.0);
        assert_eq!(e.get(0, 1), 0.0);
        assert_eq!(e.get(2, 1), 0.0);
        assert_eq!(e.get(0, 0), 4.0);
        assert!(e.is_symmetric(0.0));
    }
}
