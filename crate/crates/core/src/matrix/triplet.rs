use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Coordinate-form matrix. Entries are kept sorted by `(row, col)` with no
/// duplicates and no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletMatrix {
    num_rows: usize,
    num_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletMatrix {
    pub fn empty(num_rows: usize, num_cols: usize) -> Self {
        TripletMatrix {
            num_rows,
            num_cols,
            entries: Vec::new(),
        }
    }

    /// Builds a normalized matrix: duplicate coordinates are summed and
    /// zeros (explicit or produced by cancellation) are dropped.
    pub fn from_entries(
        num_rows: usize,
        num_cols: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(row, col, _) in &entries {
            if row >= num_rows || col >= num_cols {
                return Err(Error::Bounds {
                    row,
                    col,
                    num_rows,
                    num_cols,
                });
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (row, col, value) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == row && last.1 == col => last.2 += value,
                _ => merged.push((row, col, value)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        Ok(TripletMatrix {
            num_rows,
            num_cols,
            entries: merged,
        })
    }

    pub fn from_dense(dense: &DenseMatrix) -> Self {
        let mut entries = Vec::new();
        for i in 0..dense.num_rows() {
            for j in 0..dense.num_cols() {
                let v = dense.get(i, j);
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        TripletMatrix {
            num_rows: dense.num_rows(),
            num_cols: dense.num_cols(),
            entries,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut dense = DenseMatrix::zeros(self.num_rows, self.num_cols);
        for &(i, j, v) in &self.entries {
            dense.set(i, j, v);
        }
        dense
    }
}
