use super::{vector, DenseMatrix, LinalgError, LinearOperator};

/// Compressed sparse row matrix with sorted, unique column indices per row.
///
/// Symmetric matrices are stored fully expanded; there is no implicit
/// half-storage mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if row_ptr.len() != rows + 1 {
            return Err(LinalgError::InvalidCsr(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                rows + 1
            )));
        }
        if col_idx.len() != values.len() {
            return Err(LinalgError::InvalidCsr(
                "col_idx and values differ in length".into(),
            ));
        }
        if row_ptr[0] != 0 || row_ptr[rows] != values.len() {
            return Err(LinalgError::InvalidCsr(
                "row_ptr must start at 0 and end at nnz".into(),
            ));
        }
        for i in 0..rows {
            let (s, e) = (row_ptr[i], row_ptr[i + 1]);
            if s > e {
                return Err(LinalgError::InvalidCsr(format!("row_ptr decreases at row {i}")));
            }
            let cols_i = &col_idx[s..e];
            if cols_i.iter().any(|&c| c >= cols) {
                return Err(LinalgError::InvalidCsr(format!("column out of range in row {i}")));
            }
            if cols_i.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LinalgError::InvalidCsr(format!(
                    "columns not strictly increasing in row {i}"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a CSR matrix from 0-based `(row, col, value)` triplets.
    /// Duplicates are summed in input order.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(LinalgError::InvalidCsr(format!(
                "triplet ({r}, {c}) outside {rows}x{cols}"
            )));
        }
        // Stable sort keeps input order among duplicates, so summation order
        // is the file order.
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self::new(rows, cols, row_ptr, col_idx, values)
    }

    /// Converts a dense matrix, dropping exact zeros.
    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut row_ptr = Vec::with_capacity(a.rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..a.rows() {
            for (j, &v) in a.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(values.len());
        }
        Self {
            rows: a.rows(),
            cols: a.cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            m.set(i, j, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored entries in row-major order as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    /// Bitwise structural and value equality (distinguishes `0.0` from `-0.0`).
    pub fn bitwise_eq(&self, other: &CsrMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl LinearOperator for CsrMatrix {
    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let start = self.row_ptr[i];
            let vals = &self.values[start..self.row_ptr[i + 1]];
            let cols = &self.col_idx[start..self.row_ptr[i + 1]];
            // Same order as the dense kernel, so a fully stored row agrees bitwise.
            *o = vector::ordered_sum(vals.len(), |k| vals[k] * v[cols[k]]);
        }
    }

    fn apply_transpose_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (i, vi) in v.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.col_idx[k]] += self.values[k] * vi;
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let n = self.rows.min(self.cols);
        let mut d = vec![0.0; n];
        for (i, di) in d.iter_mut().enumerate() {
            let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
            if let Ok(pos) = cols.binary_search(&i) {
                *di = self.values[self.row_ptr[i] + pos];
            }
        }
        d
    }

    fn frobenius_norm(&self) -> f64 {
        vector::norm2(&self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 2, 0.5), (1, 0, 4.0)])
            .unwrap();
        assert_eq!(m.row_ptr(), &[0, 1, 3]);
        assert_eq!(m.col_idx(), &[1, 0, 2]);
        assert_eq!(m.values(), &[2.0, 4.0, 1.5]);
    }

    #[test]
    fn rejects_bad_structure() {
        assert!(CsrMatrix::new(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(CsrMatrix::new(2, 2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(2, 2, vec![0, 1, 2], vec![0, 2], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(2, 2, vec![1, 1, 2], vec![0, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn diagonal_handles_missing_entries() {
        let m = CsrMatrix::from_triplets(3, 3, &[(0, 0, 5.0), (1, 2, 1.0), (2, 2, -1.0)]).unwrap();
        assert_eq!(m.diagonal(), vec![5.0, 0.0, -1.0]);
    }

    #[test]
    fn dense_round_trip_keeps_empty_rows() {
        let d = DenseMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, -2.0], vec![0.0, 0.0]]);
        let s = CsrMatrix::from_dense(&d);
        assert_eq!(s.row_ptr(), &[0, 0, 2, 2]);
        assert_eq!(s.to_dense(), d);
    }
}
