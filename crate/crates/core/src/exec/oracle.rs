use crate::error::{Error, Result};
use crate::formats::{VbrCMatrix, VbrMatrix};

fn check_x(num_cols: usize, x: &[f64]) -> Result<()> {
    if x.len() != num_cols {
        return Err(Error::dim(format!(
            "x has length {}, matrix has {num_cols} columns",
            x.len()
        )));
    }
    Ok(())
}

/// Accumulates one column-major block into `y`, row by row.
#[inline]
fn block_spmv(
    vals: &[f64],
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
    x: &[f64],
    y: &mut [f64],
) {
    let h = rows.len();
    for i in rows.clone() {
        for j in cols.clone() {
            y[i] += vals[(j - cols.start) * h + (i - rows.start)] * x[j];
        }
    }
}

/// Interprets VBR SpMV block by block: skip block rows marked -1, visit
/// block columns in increasing order, and keep one running block counter
/// into `indx`.
pub fn spmv_vbr_interpret(m: &VbrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    m.check()?;
    check_x(m.num_cols, x)?;
    let mut y = vec![0.0; m.num_rows];
    let mut count = 0;
    for a in 0..m.rpntr.len() - 1 {
        if m.bpntrb[a] == -1 {
            continue;
        }
        let valid_cols = &m.bindx[m.bpntrb[a] as usize..m.bpntre[a]];
        for b in 0..m.cpntr.len() - 1 {
            if valid_cols.binary_search(&b).is_ok() {
                let vals = &m.val[m.indx[count]..m.indx[count + 1]];
                block_spmv(
                    vals,
                    m.rpntr[a]..m.rpntr[a + 1],
                    m.cpntr[b]..m.cpntr[b + 1],
                    x,
                    &mut y,
                );
                count += 1;
            }
        }
    }
    Ok(y)
}

/// Hybrid interpretation: the dense blocks as in [`spmv_vbr_interpret`]
/// (skipping `ublocks`), then the CSR remainder row by row.
pub fn spmv_vbrc_interpret(m: &VbrCMatrix, x: &[f64]) -> Result<Vec<f64>> {
    m.validate().into_result()?;
    check_x(m.num_cols, x)?;
    let mut y = vec![0.0; m.num_rows];
    let mut ordinal = 0;
    let mut dense = 0;
    let mut sparse = m.ublocks.iter().peekable();
    for a in 0..m.rpntr.len() - 1 {
        if m.bpntrb[a] == -1 {
            continue;
        }
        let valid_cols = &m.bindx[m.bpntrb[a] as usize..m.bpntre[a]];
        for b in 0..m.cpntr.len() - 1 {
            if valid_cols.binary_search(&b).is_err() {
                continue;
            }
            if sparse.peek() == Some(&&ordinal) {
                sparse.next();
            } else {
                let vals = &m.val[m.indx[dense]..m.indx[dense + 1]];
                block_spmv(
                    vals,
                    m.rpntr[a]..m.rpntr[a + 1],
                    m.cpntr[b]..m.cpntr[b + 1],
                    x,
                    &mut y,
                );
                dense += 1;
            }
            ordinal += 1;
        }
    }
    for (i, yi) in y.iter_mut().enumerate() {
        for k in m.indptr[i]..m.indptr[i + 1] {
            *yi += m.csr_val[k] * x[m.indices[k]];
        }
    }
    Ok(y)
}
