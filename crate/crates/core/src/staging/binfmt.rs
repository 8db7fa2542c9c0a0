//! Binary files exchanged with compiled kernels. All integers are u64 and all
//! values f64, little-endian.
//!
//! - `VEC1`: magic, length, payload
//! - `CSRB`: magic, rows, nnz, row pointers (rows + 1), column indices, values

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::formats::VbrCMatrix;

pub const VEC_MAGIC: &[u8; 4] = b"VEC1";
pub const CSR_MAGIC: &[u8; 4] = b"CSRB";

pub fn encode_vec(v: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * v.len());
    out.extend_from_slice(VEC_MAGIC);
    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_vec(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() < 12 || &bytes[..4] != VEC_MAGIC {
        return Err(Error::Run("vector file has a bad header".into()));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let payload = &bytes[12..];
    if payload.len() as u64 != n.saturating_mul(8) {
        return Err(Error::Run(format!(
            "vector file declares {n} values but holds {} bytes",
            payload.len()
        )));
    }
    Ok(payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Encodes the CSR remainder of `m`.
pub fn encode_remainder(m: &VbrCMatrix) -> Vec<u8> {
    encode_csr(m.num_rows, &m.indptr, &m.indices, &m.csr_val)
}

pub fn encode_csr(rows: usize, indptr: &[usize], indices: &[usize], values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 8 * (indptr.len() + 2 * values.len()));
    out.extend_from_slice(CSR_MAGIC);
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for &p in indptr {
        out.extend_from_slice(&(p as u64).to_le_bytes());
    }
    for &c in indices {
        out.extend_from_slice(&(c as u64).to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_vec(path: &Path, v: &[f64]) -> Result<()> {
    fs::write(path, encode_vec(v))?;
    Ok(())
}

pub fn read_vec(path: &Path) -> Result<Vec<f64>> {
    decode_vec(&fs::read(path)?)
}
