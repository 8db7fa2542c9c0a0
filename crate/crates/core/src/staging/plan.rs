use std::ops::Range;

use crate::error::Result;
use crate::formats::VbrCMatrix;

/// One dense block with every bound resolved to a concrete integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseLoop {
    pub block_ordinal: usize,
    pub block_row: usize,
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
    pub val_offset: usize,
}

impl DenseLoop {
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

/// Rows owned by one block row and the dense loops that write them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockRowPlan {
    pub row_start: usize,
    pub row_end: usize,
    /// Range into [`KernelPlan::dense_loops`].
    pub dense: Range<usize>,
    pub remainder_nnz: usize,
}

/// A fully resolved SpMV schedule for one VBR-C matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelPlan {
    pub num_rows: usize,
    pub num_cols: usize,
    pub val_len: usize,
    pub remainder_nnz: usize,
    /// Ordered by block row, then block column.
    pub dense_loops: Vec<DenseLoop>,
    pub block_rows: Vec<BlockRowPlan>,
    /// Whether the CSR remainder holds any entry.
    pub csr_dispatch: bool,
}

impl KernelPlan {
    pub fn block_row_ranges(&self) -> Vec<(usize, usize)> {
        self.block_rows
            .iter()
            .map(|b| (b.row_start, b.row_end))
            .collect()
    }

    pub fn dense_loops_of(&self, block_row: usize) -> &[DenseLoop] {
        &self.dense_loops[self.block_rows[block_row].dense.clone()]
    }

    /// Stored entries touched by a block row, plus one unit per row for the
    /// initial store to `y`.
    pub fn block_row_work(&self, block_row: usize) -> usize {
        let b = &self.block_rows[block_row];
        let dense: usize = self
            .dense_loops_of(block_row)
            .iter()
            .map(DenseLoop::area)
            .sum();
        dense + b.remainder_nnz + (b.row_end - b.row_start)
    }

    /// Splits block rows into `threads` contiguous chunks of roughly equal
    /// work. Always returns exactly `max(threads, 1)` ranges; trailing ones
    /// may be empty.
    pub fn chunks(&self, threads: usize) -> Vec<Range<usize>> {
        let threads = threads.max(1);
        let n = self.block_rows.len();
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0usize);
        for b in 0..n {
            prefix.push(prefix[b] + self.block_row_work(b));
        }
        let total = prefix[n] as u128;
        let mut bounds = vec![0usize];
        let mut idx = 0;
        for k in 1..threads {
            while idx < n && (prefix[idx] as u128) * (threads as u128) < (k as u128) * total {
                idx += 1;
            }
            bounds.push(idx);
        }
        bounds.push(n);
        bounds.windows(2).map(|w| w[0]..w[1]).collect()
    }
}

/// Resolves the block traversal of `m` into literal loop bounds and value
/// offsets. Blocks in `ublocks` are left to the CSR remainder.
pub fn build_plan(m: &VbrCMatrix) -> Result<KernelPlan> {
    m.validate().into_result()?;
    let mut dense_loops = Vec::with_capacity(m.num_dense_blocks());
    for (d, block) in m.dense_blocks() {
        dense_loops.push(DenseLoop {
            block_ordinal: block.ordinal,
            block_row: block.block_row,
            row_start: block.row_start,
            row_end: block.row_end,
            col_start: block.col_start,
            col_end: block.col_end,
            val_offset: m.indx[d],
        });
    }
    let mut block_rows = Vec::with_capacity(m.num_block_rows());
    let mut cursor = 0;
    for a in 0..m.num_block_rows() {
        let start = cursor;
        while cursor < dense_loops.len() && dense_loops[cursor].block_row == a {
            cursor += 1;
        }
        let (r0, r1) = (m.rpntr[a], m.rpntr[a + 1]);
        block_rows.push(BlockRowPlan {
            row_start: r0,
            row_end: r1,
            dense: start..cursor,
            remainder_nnz: m.indptr[r1] - m.indptr[r0],
        });
    }
    Ok(KernelPlan {
        num_rows: m.num_rows,
        num_cols: m.num_cols,
        val_len: m.val.len(),
        remainder_nnz: m.csr_val.len(),
        dense_loops,
        block_rows,
        csr_dispatch: !m.csr_val.is_empty(),
    })
}
