use crate::error::{Error, Result};
use crate::formats::VbrCMatrix;
use crate::par;
use crate::staging::{BlockRowPlan, KernelPlan};

fn check(plan: &KernelPlan, m: &VbrCMatrix, x: &[f64]) -> Result<()> {
    if plan.num_rows != m.num_rows || plan.num_cols != m.num_cols || plan.val_len != m.val.len() {
        return Err(Error::dim("plan was built for a different matrix"));
    }
    if x.len() != m.num_cols {
        return Err(Error::dim(format!(
            "x has length {}, matrix has {} columns",
            x.len(),
            m.num_cols
        )));
    }
    Ok(())
}

/// Computes the rows of one block row into `out` (which starts at
/// `b.row_start`): dense loops in block-column order, then the remainder.
fn run_block_row(plan: &KernelPlan, m: &VbrCMatrix, x: &[f64], b: usize, out: &mut [f64]) {
    let BlockRowPlan {
        row_start,
        row_end,
        dense,
        ..
    } = &plan.block_rows[b];
    out.fill(0.0);
    for l in &plan.dense_loops[dense.clone()] {
        let h = l.rows();
        let base = l.row_start - row_start;
        for j in l.col_start..l.col_end {
            let xj = x[j];
            let col = &m.val[l.val_offset + (j - l.col_start) * h..][..h];
            for (yi, a) in out[base..base + h].iter_mut().zip(col) {
                *yi += a * xj;
            }
        }
    }
    if plan.block_rows[b].remainder_nnz == 0 {
        return;
    }
    for (i, yi) in (*row_start..*row_end).zip(out.iter_mut()) {
        let (k0, k1) = (m.indptr[i], m.indptr[i + 1]);
        let mut acc = *yi;
        for (v, &j) in m.csr_val[k0..k1].iter().zip(&m.indices[k0..k1]) {
            acc += v * x[j];
        }
        *yi = acc;
    }
}

fn slots<'a>(plan: &KernelPlan, y: &'a mut [f64]) -> Vec<&'a mut [f64]> {
    let lengths: Vec<usize> = plan
        .block_rows
        .iter()
        .map(|b| b.row_end - b.row_start)
        .collect();
    par::split_lengths(y, &lengths)
}

/// Executes a staged plan in-process, one task per block row. Each task owns
/// a disjoint slice of `y`, so results are identical to
/// [`execute_plan_seq`] bit for bit.
pub fn execute_plan(plan: &KernelPlan, m: &VbrCMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check(plan, m, x)?;
    let mut y = vec![0.0; m.num_rows];
    let ids: Vec<usize> = (0..plan.block_rows.len()).collect();
    par::for_each_mut(&ids, slots(plan, &mut y), |&b, out| {
        run_block_row(plan, m, x, b, out)
    });
    Ok(y)
}

/// Single-threaded variant of [`execute_plan`].
pub fn execute_plan_seq(plan: &KernelPlan, m: &VbrCMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check(plan, m, x)?;
    let mut y = vec![0.0; m.num_rows];
    for (b, out) in slots(plan, &mut y).into_iter().enumerate() {
        run_block_row(plan, m, x, b, out);
    }
    Ok(y)
}
