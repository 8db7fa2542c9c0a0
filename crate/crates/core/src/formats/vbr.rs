use std::fmt;

use crate::error::Result;
use crate::formats::{fmt_array, ValidationReport};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::partition::{block_lookup, Partition};

/// Variable block row matrix.
///
/// `bpntrb[a] == -1` marks a block row without materialized blocks; for such
/// rows `bpntre[a]` repeats the running block count so that the
/// `bpntrb..bpntre` ranges tile `bindx`. Block values are column-major and
/// `indx` holds one offset per block plus the final length of `val`.
#[derive(Debug, Clone, PartialEq)]
pub struct VbrMatrix {
    pub num_rows: usize,
    pub num_cols: usize,
    pub rpntr: Vec<usize>,
    pub cpntr: Vec<usize>,
    pub bindx: Vec<usize>,
    pub bpntrb: Vec<i64>,
    pub bpntre: Vec<usize>,
    pub indx: Vec<usize>,
    pub val: Vec<f64>,
}

/// Geometry of one materialized block, in global ordinal order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRef {
    pub ordinal: usize,
    pub block_row: usize,
    pub block_col: usize,
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
}

impl BlockRef {
    pub fn rows(&self) -> usize {
        self.row_end - self.row_start
    }

    pub fn cols(&self) -> usize {
        self.col_end - self.col_start
    }

    pub fn area(&self) -> usize {
        self.rows() * self.cols()
    }
}

fn check_pointer(report: &mut ValidationReport, name: &'static str, ptr: &[usize], dim: usize) {
    if ptr.first() != Some(&0) {
        report.push(name, Some(0), "must start at 0");
        return;
    }
    for (k, w) in ptr.windows(2).enumerate() {
        if w[0] >= w[1] {
            report.push(
                name,
                Some(k + 1),
                format!("{} does not exceed {}", w[1], w[0]),
            );
        }
    }
    if ptr.last() != Some(&dim) {
        report.push(name, Some(ptr.len() - 1), format!("must end at {dim}"));
    }
}

/// Checks rpntr/cpntr/bindx/bpntrb/bpntre; shared with VBR-C.
#[allow(clippy::too_many_arguments)]
pub(crate) fn validate_block_structure(
    report: &mut ValidationReport,
    num_rows: usize,
    num_cols: usize,
    rpntr: &[usize],
    cpntr: &[usize],
    bindx: &[usize],
    bpntrb: &[i64],
    bpntre: &[usize],
) {
    check_pointer(report, "rpntr", rpntr, num_rows);
    check_pointer(report, "cpntr", cpntr, num_cols);
    let nbr = rpntr.len().saturating_sub(1);
    let nbc = cpntr.len().saturating_sub(1);
    if bpntrb.len() != nbr {
        report.push(
            "bpntrb",
            None,
            format!("length {} for {nbr} block rows", bpntrb.len()),
        );
    }
    if bpntre.len() != nbr {
        report.push(
            "bpntre",
            None,
            format!("length {} for {nbr} block rows", bpntre.len()),
        );
    }
    let mut cursor = 0usize;
    for a in 0..nbr.min(bpntrb.len()).min(bpntre.len()) {
        let (b, e) = (bpntrb[a], bpntre[a]);
        if b == -1 {
            if e != cursor {
                report.push(
                    "bpntre",
                    Some(a),
                    format!("empty block row must repeat running count {cursor}, found {e}"),
                );
            }
            continue;
        }
        if b < 0 {
            report.push(
                "bpntrb",
                Some(a),
                format!("negative start {b} other than -1"),
            );
            continue;
        }
        let b = b as usize;
        if b != cursor {
            report.push("bpntrb", Some(a), format!("expected {cursor}, found {b}"));
        }
        if e <= b {
            report.push(
                "bpntre",
                Some(a),
                format!("end {e} not past start {b} for a non-empty block row"),
            );
            continue;
        }
        if e > bindx.len() {
            report.push(
                "bpntre",
                Some(a),
                format!("end {e} beyond bindx length {}", bindx.len()),
            );
            continue;
        }
        for k in b..e {
            if bindx[k] >= nbc {
                report.push(
                    "bindx",
                    Some(k),
                    format!("block column {} >= {nbc}", bindx[k]),
                );
            }
            if k > b && bindx[k] <= bindx[k - 1] {
                report.push("bindx", Some(k), "not strictly increasing within block row");
            }
        }
        cursor = e;
    }
    if cursor != bindx.len() && report.is_ok() {
        report.push(
            "bindx",
            None,
            format!("{} entries but block rows cover {cursor}", bindx.len()),
        );
    }
}

/// Walks materialized blocks in global ordinal order. Assumes the block
/// structure has been validated.
pub(crate) fn block_refs(
    rpntr: &[usize],
    cpntr: &[usize],
    bindx: &[usize],
    bpntrb: &[i64],
    bpntre: &[usize],
) -> Vec<BlockRef> {
    let mut out = Vec::with_capacity(bindx.len());
    for a in 0..rpntr.len() - 1 {
        if bpntrb[a] == -1 {
            continue;
        }
        for k in bpntrb[a] as usize..bpntre[a] {
            let b = bindx[k];
            out.push(BlockRef {
                ordinal: k,
                block_row: a,
                block_col: b,
                row_start: rpntr[a],
                row_end: rpntr[a + 1],
                col_start: cpntr[b],
                col_end: cpntr[b + 1],
            });
        }
    }
    out
}

impl VbrMatrix {
    pub fn num_blocks(&self) -> usize {
        self.bindx.len()
    }

    pub fn num_block_rows(&self) -> usize {
        self.rpntr.len() - 1
    }

    /// Reports every violated invariant; never aborts.
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
        if self.indx.len() != self.bindx.len() + 1 {
            report.push(
                "indx",
                None,
                format!("length {} for {} blocks", self.indx.len(), self.bindx.len()),
            );
            return report;
        }
        if self.indx[0] != 0 {
            report.push("indx", Some(0), "must start at 0");
        }
        for block in self.blocks() {
            let k = block.ordinal;
            let span = self.indx[k + 1] as i64 - self.indx[k] as i64;
            if span != block.area() as i64 {
                report.push(
                    "indx",
                    Some(k + 1),
                    format!("block {k} spans {span} values, area is {}", block.area()),
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
        report
    }

    pub fn blocks(&self) -> Vec<BlockRef> {
        block_refs(
            &self.rpntr,
            &self.cpntr,
            &self.bindx,
            &self.bpntrb,
            &self.bpntre,
        )
    }

    /// Column-major values of block `k`.
    pub fn block_values(&self, k: usize) -> &[f64] {
        &self.val[self.indx[k]..self.indx[k + 1]]
    }

    /// Nonzeros stored in `val`; `val.len() - nnz()` is the zero-fill.
    pub fn nnz(&self) -> usize {
        self.val.iter().filter(|v| **v != 0.0).count()
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        self.validate().into_result()?;
        let mut dense = DenseMatrix::zeros(self.num_rows, self.num_cols);
        for block in self.blocks() {
            let vals = self.block_values(block.ordinal);
            let h = block.rows();
            for j in block.col_start..block.col_end {
                for i in block.row_start..block.row_end {
                    let v = vals[(j - block.col_start) * h + (i - block.row_start)];
                    dense.set(i, j, v);
                }
            }
        }
        Ok(dense)
    }
}

/// Debug dump, one indirection array per line.
impl fmt::Display for VbrMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_array(f, "Val", &self.val)?;
        fmt_array(f, "Indx", &self.indx)?;
        fmt_array(f, "Bindx", &self.bindx)?;
        fmt_array(f, "Rpntr", &self.rpntr)?;
        fmt_array(f, "Cpntr", &self.cpntr)?;
        fmt_array(f, "Bpntrb", &self.bpntrb)?;
        fmt_array(f, "Bpntre", &self.bpntre)
    }
}

/// Materializes every grid cell holding at least one nonzero as a dense
/// column-major block; all-zero cells are omitted.
pub fn csr_to_vbr(a: &CsrMatrix, p: &Partition) -> Result<VbrMatrix> {
    p.check_covers(a.num_rows(), a.num_cols())?;
    let rpntr = p.rpntr();
    let cpntr = p.cpntr();
    let nbr = rpntr.len() - 1;
    let nbc = cpntr.len() - 1;
    let col_block = block_lookup(&cpntr);

    let mut bindx = Vec::new();
    let mut bpntrb = Vec::with_capacity(nbr);
    let mut bpntre = Vec::with_capacity(nbr);
    let mut present = vec![false; nbc];
    for a_row in 0..nbr {
        let start = bindx.len();
        for i in rpntr[a_row]..rpntr[a_row + 1] {
            for &c in a.row(i).0 {
                present[col_block[c]] = true;
            }
        }
        for (b, flag) in present.iter_mut().enumerate() {
            if *flag {
                bindx.push(b);
                *flag = false;
            }
        }
        if bindx.len() == start {
            bpntrb.push(-1);
        } else {
            bpntrb.push(start as i64);
        }
        bpntre.push(bindx.len());
    }

    let mut vbr = VbrMatrix {
        num_rows: a.num_rows(),
        num_cols: a.num_cols(),
        rpntr,
        cpntr,
        bindx,
        bpntrb,
        bpntre,
        indx: Vec::new(),
        val: Vec::new(),
    };
    let blocks = vbr.blocks();
    let mut indx = Vec::with_capacity(blocks.len() + 1);
    indx.push(0);
    for b in &blocks {
        indx.push(indx.last().unwrap() + b.area());
    }
    let mut val = vec![0.0; *indx.last().unwrap()];

    // ordinal of (block row, block col) for the current block row
    let mut slot = vec![usize::MAX; nbc];
    for a_row in 0..nbr {
        if vbr.bpntrb[a_row] == -1 {
            continue;
        }
        let range = vbr.bpntrb[a_row] as usize..vbr.bpntre[a_row];
        for k in range.clone() {
            slot[vbr.bindx[k]] = k;
        }
        let r0 = vbr.rpntr[a_row];
        let h = vbr.rpntr[a_row + 1] - r0;
        for i in r0..vbr.rpntr[a_row + 1] {
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let b = col_block[c];
                let k = slot[b];
                val[indx[k] + (c - vbr.cpntr[b]) * h + (i - r0)] = v;
            }
        }
        for k in range {
            slot[vbr.bindx[k]] = usize::MAX;
        }
    }
    vbr.indx = indx;
    vbr.val = val;
    Ok(vbr)
}

impl VbrMatrix {
    pub(crate) fn check(&self) -> Result<()> {
        self.validate().into_result()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::matrix::TripletMatrix;

    fn single_block(x: f64) -> VbrMatrix {
        VbrMatrix {
            num_rows: 1,
            num_cols: 1,
            rpntr: vec![0, 1],
            cpntr: vec![0, 1],
            bindx: vec![0],
            bpntrb: vec![0],
            bpntre: vec![1],
            indx: vec![0, 1],
            val: vec![x],
        }
    }

    #[test]
    fn single_block_to_dense() {
        let d = single_block(3.5).to_dense().unwrap();
        assert_eq!(d.get(0, 0), 3.5);
    }

    #[test]
    fn non_empty_row_with_empty_range_is_reported() {
        let mut m = single_block(1.0);
        m.bpntre = vec![0];
        let report = m.validate();
        assert!(report.mentions("bpntre"), "{report}");
    }

    #[test]
    fn all_zero_matrix() {
        let a = CsrMatrix::empty(4, 4);
        let p = Partition::new(vec![1, 4], vec![2, 4]).unwrap();
        let v = csr_to_vbr(&a, &p).unwrap();
        assert_eq!(v.bpntrb, vec![-1, -1]);
        assert_eq!(v.bpntre, vec![0, 0]);
        assert!(v.val.is_empty());
        assert_eq!(v.indx, vec![0]);
        assert!(v.validate().is_ok());
    }

    #[test]
    fn partition_mismatch() {
        let a = CsrMatrix::empty(4, 4);
        let p = Partition::new(vec![4], vec![3]).unwrap();
        assert!(matches!(csr_to_vbr(&a, &p), Err(Error::Dim(_))));
    }

    #[test]
    fn empty_block_row_in_the_middle() {
        let t = TripletMatrix::from_entries(3, 2, vec![(0, 0, 1.0), (2, 1, 2.0)]).unwrap();
        let a = CsrMatrix::from_triplets(&t);
        let p = Partition::new(vec![1, 2, 3], vec![1, 2]).unwrap();
        let v = csr_to_vbr(&a, &p).unwrap();
        assert_eq!(v.bpntrb, vec![0, -1, 1]);
        assert_eq!(v.bpntre, vec![1, 1, 2]);
        assert!(v.validate().is_ok());
        assert_eq!(v.to_dense().unwrap(), a.to_dense());
    }
}
