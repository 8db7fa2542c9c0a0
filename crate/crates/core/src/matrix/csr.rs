use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, TripletMatrix};

/// Compressed sparse row matrix with strictly increasing column indices per
/// row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    num_rows: usize,
    num_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Checks every CSR invariant before accepting the arrays.
    pub fn from_parts(
        num_rows: usize,
        num_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != num_rows + 1 {
            return Err(Error::Format(format!(
                "row_ptr has length {} for {} rows",
                row_ptr.len(),
                num_rows
            )));
        }
        if row_ptr[0] != 0 || row_ptr[num_rows] != col_idx.len() || col_idx.len() != values.len() {
            return Err(Error::Format(format!(
                "row_ptr ends ({}, {}) disagree with {} indices / {} values",
                row_ptr[0],
                row_ptr[num_rows],
                col_idx.len(),
                values.len()
            )));
        }
        for i in 0..num_rows {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::Format(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Format(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
            if let Some(&c) = cols.last() {
                if c >= num_cols {
                    return Err(Error::Format(format!(
                        "column index {c} out of range in row {i}"
                    )));
                }
            }
        }
        Ok(CsrMatrix {
            num_rows,
            num_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn empty(num_rows: usize, num_cols: usize) -> Self {
        CsrMatrix {
            num_rows,
            num_cols,
            row_ptr: vec![0; num_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_triplets(m: &TripletMatrix) -> Self {
        let mut row_ptr = vec![0usize; m.num_rows() + 1];
        for &(i, _, _) in m.entries() {
            row_ptr[i + 1] += 1;
        }
        for i in 0..m.num_rows() {
            row_ptr[i + 1] += row_ptr[i];
        }
        // entries are already sorted row-major
        let col_idx = m.entries().iter().map(|e| e.1).collect();
        let values = m.entries().iter().map(|e| e.2).collect();
        CsrMatrix {
            num_rows: m.num_rows(),
            num_cols: m.num_cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(dense: &DenseMatrix) -> Self {
        Self::from_triplets(&TripletMatrix::from_dense(dense))
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
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

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut row_ptr = vec![0usize; self.num_cols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for c in 0..self.num_cols {
            row_ptr[c + 1] += row_ptr[c];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.num_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                col_idx[next[c]] = i;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            num_rows: self.num_cols,
            num_cols: self.num_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_triplets(&self) -> TripletMatrix {
        let mut entries = Vec::with_capacity(self.nnz());
        for i in 0..self.num_rows {
            let (cols, vals) = self.row(i);
            entries.extend(cols.iter().zip(vals).map(|(&c, &v)| (i, c, v)));
        }
        TripletMatrix::from_entries(self.num_rows, self.num_cols, entries)
            .expect("CSR entries are in bounds")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut dense = DenseMatrix::zeros(self.num_rows, self.num_cols);
        for i in 0..self.num_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                dense.set(i, c, v);
            }
        }
        dense
    }

    /// Reference SpMV: `y[i] = sum_j A[i,j] * x[j]`, accumulated in increasing
    /// column order within each row.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.num_cols {
            return Err(Error::dim(format!(
                "x has length {}, matrix has {} columns",
                x.len(),
                self.num_cols
            )));
        }
        let mut y = vec![0.0; self.num_rows];
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_matrix_has_zero_row_ptr() {
        let csr = CsrMatrix::from_triplets(&TripletMatrix::empty(3, 3));
        assert_eq!(csr.row_ptr(), &[0, 0, 0, 0]);
        assert_eq!(csr.nnz(), 0);
    }

    #[test]
    fn two_by_two_block() {
        let t = TripletMatrix::from_entries(
            2,
            2,
            vec![(0, 0, 4.0), (0, 1, 2.0), (1, 0, 1.0), (1, 1, 5.0)],
        )
        .unwrap();
        let csr = CsrMatrix::from_triplets(&t);
        assert_eq!(csr.row_ptr(), &[0, 2, 4]);
        assert_eq!(csr.col_idx(), &[0, 1, 0, 1]);
        assert_eq!(csr.values(), &[4.0, 2.0, 1.0, 5.0]);
    }

    #[test]
    fn identity_spmv() {
        let t = TripletMatrix::from_entries(3, 3, (0..3).map(|i| (i, i, 1.0)).collect()).unwrap();
        let y = CsrMatrix::from_triplets(&t).spmv(&[7.0, 8.0, 9.0]).unwrap();
        assert_eq!(y, vec![7.0, 8.0, 9.0]);
    }

    #[test]
    fn empty_row_yields_zero() {
        let t = TripletMatrix::from_entries(3, 2, vec![(0, 0, 2.0), (2, 1, 3.0)]).unwrap();
        let y = CsrMatrix::from_triplets(&t).spmv(&[1.0, 1.0]).unwrap();
        assert_eq!(y, vec![2.0, 0.0, 3.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let csr = CsrMatrix::empty(2, 3);
        assert!(matches!(csr.spmv(&[1.0, 2.0]), Err(Error::Dim(_))));
    }

    #[test]
    fn from_parts_rejects_unsorted_columns() {
        let err = CsrMatrix::from_parts(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn transpose_twice_is_identity() {
        let t = TripletMatrix::from_entries(
            3,
            4,
            vec![(0, 3, 1.0), (1, 0, 2.0), (2, 2, 3.0), (2, 3, 4.0)],
        )
        .unwrap();
        let csr = CsrMatrix::from_triplets(&t);
        assert_eq!(csr.transpose().transpose(), csr);
        assert_eq!(csr.transpose().row(3), (&[0usize, 2][..], &[1.0, 4.0][..]));
    }
}
