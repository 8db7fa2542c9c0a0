use std::fmt;

use crate::classify::{BlockFeatures, Storage};
use crate::error::Result;
use crate::formats::vbr::{block_refs, validate_block_structure};
use crate::formats::{fmt_array, BlockRef, ValidationReport, VbrMatrix};
use crate::matrix::{CsrMatrix, DenseMatrix, TripletMatrix};

/// Hybrid VBR-C matrix.
///
/// The block structure (`rpntr` .. `bpntre`) still enumerates every
/// materialized block. Blocks listed in `ublocks` (by global ordinal) live in
/// the CSR remainder `indptr`/`indices`/`csr_val`, stored row-major over the
/// full matrix. `indx` and `val` cover the dense blocks only, in ordinal
/// order, so `indx.len() == num_blocks - ublocks.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct VbrCMatrix {
    pub num_rows: usize,
    pub num_cols: usize,
    pub rpntr: Vec<usize>,
    pub cpntr: Vec<usize>,
    pub bindx: Vec<usize>,
    pub bpntrb: Vec<i64>,
    pub bpntre: Vec<usize>,
    pub indx: Vec<usize>,
    pub val: Vec<f64>,
    pub ublocks: Vec<usize>,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub csr_val: Vec<f64>,
}

impl VbrCMatrix {
    pub fn num_blocks(&self) -> usize {
        self.bindx.len()
    }

    pub fn num_dense_blocks(&self) -> usize {
        self.bindx.len().saturating_sub(self.ublocks.len())
    }

    pub fn num_block_rows(&self) -> usize {
        self.rpntr.len() - 1
    }

    /// All materialized blocks, including those moved to the remainder.
    pub fn blocks(&self) -> Vec<BlockRef> {
        block_refs(
            &self.rpntr,
            &self.cpntr,
            &self.bindx,
            &self.bpntrb,
            &self.bpntre,
        )
    }

    /// Dense blocks paired with their position in `indx`.
    pub fn dense_blocks(&self) -> Vec<(usize, BlockRef)> {
        let mut sparse = self.ublocks.iter().peekable();
        let mut out = Vec::with_capacity(self.num_dense_blocks());
        for block in self.blocks() {
            if sparse.peek() == Some(&&block.ordinal) {
                sparse.next();
                continue;
            }
            out.push((out.len(), block));
        }
        out
    }

    pub fn remainder_nnz(&self) -> usize {
        self.csr_val.len()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        validate_block_structure(
            &mut report,
            self.num_rows,
            self.num_cols,
            &self.rpntr,
            &self.cpntr,
            &self.bindx,
            &self.bpntrb,
            &self.bpntre,
        );
        if !report.is_ok() {
            return report;
        }
        let nblocks = self.bindx.len();
        for (k, w) in self.ublocks.windows(2).enumerate() {
            if w[0] >= w[1] {
                report.push("ublocks", Some(k + 1), "not strictly increasing");
            }
        }
        if let Some(&last) = self.ublocks.last() {
            if last >= nblocks {
                report.push(
                    "ublocks",
                    Some(self.ublocks.len() - 1),
                    format!("ordinal {last} >= {nblocks} blocks"),
                );
            }
        }
        if !report.is_ok() {
            return report;
        }

        let dense = self.dense_blocks();
        if self.indx.len() != dense.len() + 1 {
            report.push(
                "indx",
                None,
                format!(
                    "length {} for {} dense blocks",
                    self.indx.len(),
                    dense.len()
                ),
            );
        } else {
            if self.indx[0] != 0 {
                report.push("indx", Some(0), "must start at 0");
            }
            for (d, block) in &dense {
                let span = self.indx[d + 1] as i64 - self.indx[*d] as i64;
                if span != block.area() as i64 {
                    report.push(
                        "indx",
                        Some(d + 1),
                        format!(
                            "dense block {d} spans {span} values, area is {}",
                            block.area()
                        ),
                    );
                }
            }
            let last = self.indx.len() - 1;
            if self.indx[last] != self.val.len() {
                report.push(
                    "indx",
                    Some(last),
                    format!(
                        "final offset {} differs from val length {}",
                        self.indx[last],
                        self.val.len()
                    ),
                );
            }
        }

        if self.indptr.len() != self.num_rows + 1 {
            report.push(
                "indptr",
                None,
                format!("length {} for {} rows", self.indptr.len(), self.num_rows),
            );
            return report;
        }
        if self.indptr[0] != 0 {
            report.push("indptr", Some(0), "must start at 0");
        }
        if self.indices.len() != self.csr_val.len() {
            report.push(
                "indices",
                None,
                format!(
                    "{} indices for {} values",
                    self.indices.len(),
                    self.csr_val.len()
                ),
            );
        }
        if self.indptr[self.num_rows] != self.indices.len() {
            report.push(
                "indptr",
                Some(self.num_rows),
                "does not end at the remainder length",
            );
        }
        if !report.is_ok() {
            return report;
        }
        for i in 0..self.num_rows {
            if self.indptr[i] > self.indptr[i + 1] {
                report.push("indptr", Some(i + 1), "decreasing");
                return report;
            }
        }

        // every remainder entry must fall inside a ublocks cell
        let row_block = crate::partition::block_lookup(&self.rpntr);
        let col_block = crate::partition::block_lookup(&self.cpntr);
        let is_sparse = {
            let mut flags = vec![false; nblocks];
            for &u in &self.ublocks {
                flags[u] = true;
            }
            flags
        };
        for i in 0..self.num_rows {
            let range = self.indptr[i]..self.indptr[i + 1];
            let cols = &self.indices[range.clone()];
            for (n, &j) in cols.iter().enumerate() {
                let pos = range.start + n;
                if n > 0 && j <= cols[n - 1] {
                    report.push("indices", Some(pos), "not strictly increasing within row");
                    continue;
                }
                if j >= self.num_cols {
                    report.push("indices", Some(pos), format!("column {j} out of range"));
                    continue;
                }
                let (a, b) = (row_block[i], col_block[j]);
                let ordinal = if self.bpntrb[a] == -1 {
                    None
                } else {
                    let lo = self.bpntrb[a] as usize;
                    self.bindx[lo..self.bpntre[a]]
                        .binary_search(&b)
                        .ok()
                        .map(|off| lo + off)
                };
                match ordinal {
                    Some(k) if is_sparse[k] => {}
                    _ => report.push(
                        "indices",
                        Some(pos),
                        format!("entry ({i}, {j}) is not inside a CSR-stored block"),
                    ),
                }
            }
        }
        report
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        self.validate().into_result()?;
        let mut dense = DenseMatrix::zeros(self.num_rows, self.num_cols);
        for (d, block) in self.dense_blocks() {
            let vals = &self.val[self.indx[d]..self.indx[d + 1]];
            let h = block.rows();
            for j in block.col_start..block.col_end {
                for i in block.row_start..block.row_end {
                    dense.set(
                        i,
                        j,
                        vals[(j - block.col_start) * h + (i - block.row_start)],
                    );
                }
            }
        }
        for i in 0..self.num_rows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                dense.set(i, self.indices[k], self.csr_val[k]);
            }
        }
        Ok(dense)
    }

    /// The full matrix as CSR (zero-fill dropped).
    pub fn to_csr(&self) -> Result<CsrMatrix> {
        self.validate().into_result()?;
        let mut entries = Vec::with_capacity(self.val.len() + self.csr_val.len());
        for (d, block) in self.dense_blocks() {
            let vals = &self.val[self.indx[d]..self.indx[d + 1]];
            let h = block.rows();
            for (n, &v) in vals.iter().enumerate() {
                if v != 0.0 {
                    entries.push((block.row_start + n % h, block.col_start + n / h, v));
                }
            }
        }
        for i in 0..self.num_rows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                entries.push((i, self.indices[k], self.csr_val[k]));
            }
        }
        let t = TripletMatrix::from_entries(self.num_rows, self.num_cols, entries)?;
        Ok(CsrMatrix::from_triplets(&t))
    }

    /// The CSR remainder alone as a matrix of full size.
    pub fn remainder(&self) -> Result<CsrMatrix> {
        CsrMatrix::from_parts(
            self.num_rows,
            self.num_cols,
            self.indptr.clone(),
            self.indices.clone(),
            self.csr_val.clone(),
        )
    }
}

impl fmt::Display for VbrCMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_array(f, "Val", &self.val)?;
        fmt_array(f, "Indx", &self.indx)?;
        fmt_array(f, "Bindx", &self.bindx)?;
        fmt_array(f, "Rpntr", &self.rpntr)?;
        fmt_array(f, "Cpntr", &self.cpntr)?;
        fmt_array(f, "Bpntrb", &self.bpntrb)?;
        fmt_array(f, "Bpntre", &self.bpntre)?;
        fmt_array(f, "ublocks", &self.ublocks)?;
        fmt_array(f, "indptr", &self.indptr)?;
        fmt_array(f, "indices", &self.indices)?;
        fmt_array(f, "csr_val", &self.csr_val)
    }
}

/// Splits a VBR matrix by a per-block decision. Sparse-decided blocks lose
/// their zero-fill and move to the row-major CSR remainder. A materialized
/// block holding only zeros is moved out without consulting `decide`.
pub fn vbr_to_vbrc<F>(m: &VbrMatrix, mut decide: F) -> Result<VbrCMatrix>
where
    F: FnMut(&BlockFeatures) -> Storage,
{
    m.check()?;
    let mut indx = vec![0usize];
    let mut val = Vec::new();
    let mut ublocks = Vec::new();
    let mut moved = Vec::new();
    for block in m.blocks() {
        let vals = m.block_values(block.ordinal);
        let nnz = vals.iter().filter(|v| **v != 0.0).count();
        let storage = if nnz == 0 {
            Storage::Sparse
        } else {
            decide(&BlockFeatures {
                rows: block.rows(),
                cols: block.cols(),
                density: nnz as f64 / block.area() as f64,
            })
        };
        match storage {
            Storage::Dense => {
                val.extend_from_slice(vals);
                indx.push(val.len());
            }
            Storage::Sparse => {
                ublocks.push(block.ordinal);
                let h = block.rows();
                for (n, &v) in vals.iter().enumerate() {
                    if v != 0.0 {
                        moved.push((block.row_start + n % h, block.col_start + n / h, v));
                    }
                }
            }
        }
    }
    let remainder =
        CsrMatrix::from_triplets(&TripletMatrix::from_entries(m.num_rows, m.num_cols, moved)?);
    Ok(VbrCMatrix {
        num_rows: m.num_rows,
        num_cols: m.num_cols,
        rpntr: m.rpntr.clone(),
        cpntr: m.cpntr.clone(),
        bindx: m.bindx.clone(),
        bpntrb: m.bpntrb.clone(),
        bpntre: m.bpntre.clone(),
        indx,
        val,
        ublocks,
        indptr: remainder.row_ptr().to_vec(),
        indices: remainder.col_idx().to_vec(),
        csr_val: remainder.values().to_vec(),
    })
}

impl From<VbrMatrix> for VbrCMatrix {
    /// All blocks dense, empty remainder.
    fn from(m: VbrMatrix) -> Self {
        VbrCMatrix {
            num_rows: m.num_rows,
            num_cols: m.num_cols,
            indptr: vec![0; m.num_rows + 1],
            rpntr: m.rpntr,
            cpntr: m.cpntr,
            bindx: m.bindx,
            bpntrb: m.bpntrb,
            bpntre: m.bpntre,
            indx: m.indx,
            val: m.val,
            ublocks: Vec::new(),
            indices: Vec::new(),
            csr_val: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::csr_to_vbr;
    use crate::partition::Partition;

    fn sample() -> (CsrMatrix, VbrMatrix) {
        let t = TripletMatrix::from_entries(
            4,
            4,
            vec![
                (0, 0, 1.0),
                (0, 1, 2.0),
                (1, 0, 3.0),
                (1, 1, 4.0),
                (2, 3, 5.0),
                (3, 0, 6.0),
            ],
        )
        .unwrap();
        let a = CsrMatrix::from_triplets(&t);
        let v = csr_to_vbr(&a, &Partition::new(vec![2, 4], vec![2, 4]).unwrap()).unwrap();
        (a, v)
    }

    #[test]
    fn all_dense_keeps_vbr() {
        let (_, v) = sample();
        let c = vbr_to_vbrc(&v, |_| Storage::Dense).unwrap();
        assert!(c.ublocks.is_empty());
        assert_eq!(c.val, v.val);
        assert_eq!(c.indx, v.indx);
        assert_eq!(c, VbrCMatrix::from(v));
    }

    #[test]
    fn all_sparse_remainder_is_source() {
        let (a, v) = sample();
        let c = vbr_to_vbrc(&v, |_| Storage::Sparse).unwrap();
        assert!(c.val.is_empty());
        assert_eq!(c.indx, vec![0]);
        assert_eq!(c.remainder().unwrap(), a);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn mixed_split_round_trips() {
        let (a, v) = sample();
        let c = vbr_to_vbrc(&v, |f| {
            if f.density > 0.5 {
                Storage::Dense
            } else {
                Storage::Sparse
            }
        })
        .unwrap();
        assert_eq!(c.ublocks, vec![1, 2]);
        assert!(c.validate().is_ok(), "{}", c.validate());
        assert_eq!(c.to_dense().unwrap(), a.to_dense());
        assert_eq!(c.to_csr().unwrap(), a);
    }

    #[test]
    fn remainder_entry_inside_dense_block_is_reported() {
        let (_, v) = sample();
        let mut c = vbr_to_vbrc(&v, |_| Storage::Dense).unwrap();
        c.indptr = vec![0, 1, 1, 1, 1];
        c.indices = vec![0];
        c.csr_val = vec![9.0];
        assert!(c.validate().mentions("indices"));
    }

    #[test]
    fn bad_ublocks_reported() {
        let (_, v) = sample();
        let mut c = vbr_to_vbrc(&v, |_| Storage::Sparse).unwrap();
        c.ublocks = vec![2, 1];
        assert!(c.validate().mentions("ublocks"));
        c.ublocks = vec![7];
        assert!(c.validate().mentions("ublocks"));
    }
}
