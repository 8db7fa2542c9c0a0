//! Binary VBR-C container.
//!
//! Layout (all little-endian): magic `VBRC`, `u16` version, `u64` rows,
//! `u64` cols, then eleven arrays in the order rpntr, cpntr, bindx, bpntrb,
//! bpntre, indx, val, ublocks, indptr, indices, csr_val. Each array is a
//! `u64` length followed by its elements: `i64` for index arrays, IEEE-754
//! binary64 for value arrays.

use crate::error::{Error, Result};
use crate::formats::VbrCMatrix;

pub const MAGIC: &[u8; 4] = b"VBRC";
pub const FORMAT_VERSION: u16 = 1;

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_index_array<I: Copy + Into<i64>>(out: &mut Vec<u8>, values: &[I]) {
    put_u64(out, values.len() as u64);
    for &v in values {
        out.extend_from_slice(&v.into().to_le_bytes());
    }
}

fn put_usize_array(out: &mut Vec<u8>, values: &[usize]) {
    put_u64(out, values.len() as u64);
    for &v in values {
        out.extend_from_slice(&(v as i64).to_le_bytes());
    }
}

fn put_f64_array(out: &mut Vec<u8>, values: &[f64]) {
    put_u64(out, values.len() as u64);
    for &v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn serialize_vbrc(m: &VbrCMatrix) -> Result<Vec<u8>> {
    m.validate().into_result()?;
    let words = 2
        + 11
        + m.rpntr.len()
        + m.cpntr.len()
        + 3 * m.bindx.len()
        + m.indx.len()
        + m.val.len()
        + m.ublocks.len()
        + m.indptr.len()
        + 2 * m.csr_val.len();
    let mut out = Vec::with_capacity(6 + 8 * words);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    put_u64(&mut out, m.num_rows as u64);
    put_u64(&mut out, m.num_cols as u64);
    put_usize_array(&mut out, &m.rpntr);
    put_usize_array(&mut out, &m.cpntr);
    put_usize_array(&mut out, &m.bindx);
    put_index_array(&mut out, &m.bpntrb);
    put_usize_array(&mut out, &m.bpntre);
    put_usize_array(&mut out, &m.indx);
    put_f64_array(&mut out, &m.val);
    put_usize_array(&mut out, &m.ublocks);
    put_usize_array(&mut out, &m.indptr);
    put_usize_array(&mut out, &m.indices);
    put_f64_array(&mut out, &m.csr_val);
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Ser(format!("truncated while reading {what}")))?;
        let bytes = &self.buf[self.pos..end];
        self.pos = end;
        Ok(bytes)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn len(&mut self, what: &str) -> Result<usize> {
        let n = self.u64(what)?;
        let remaining = (self.buf.len() - self.pos) / 8;
        if n > remaining as u64 {
            return Err(Error::Ser(format!(
                "{what} claims {n} elements, only {remaining} remain"
            )));
        }
        Ok(n as usize)
    }

    fn i64_array(&mut self, what: &str) -> Result<Vec<i64>> {
        let n = self.len(what)?;
        let bytes = self.take(8 * n, what)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn usize_array(&mut self, what: &str) -> Result<Vec<usize>> {
        self.i64_array(what)?
            .into_iter()
            .map(|v| {
                usize::try_from(v).map_err(|_| Error::Ser(format!("negative entry {v} in {what}")))
            })
            .collect()
    }

    fn f64_array(&mut self, what: &str) -> Result<Vec<f64>> {
        let n = self.len(what)?;
        let bytes = self.take(8 * n, what)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Parses and validates a VBR-C container.
pub fn deserialize_vbrc(bytes: &[u8]) -> Result<VbrCMatrix> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Ser("bad magic".into()));
    }
    let version = u16::from_le_bytes(r.take(2, "version")?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Ser(format!("unsupported version {version}")));
    }
    let num_rows = r.u64("num_rows")? as usize;
    let num_cols = r.u64("num_cols")? as usize;
    let m = VbrCMatrix {
        num_rows,
        num_cols,
        rpntr: r.usize_array("rpntr")?,
        cpntr: r.usize_array("cpntr")?,
        bindx: r.usize_array("bindx")?,
        bpntrb: r.i64_array("bpntrb")?,
        bpntre: r.usize_array("bpntre")?,
        indx: r.usize_array("indx")?,
        val: r.f64_array("val")?,
        ublocks: r.usize_array("ublocks")?,
        indptr: r.usize_array("indptr")?,
        indices: r.usize_array("indices")?,
        csr_val: r.f64_array("csr_val")?,
    };
    if r.pos != bytes.len() {
        return Err(Error::Ser(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    let report = m.validate();
    if !report.is_ok() {
        return Err(Error::Ser(format!("decoded matrix is invalid: {report}")));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Storage;
    use crate::formats::{csr_to_vbr, vbr_to_vbrc};
    use crate::matrix::{CsrMatrix, TripletMatrix};
    use crate::partition::Partition;

    fn sample() -> VbrCMatrix {
        let t = TripletMatrix::from_entries(
            3,
            3,
            vec![
                (0, 0, 1.5),
                (0, 1, -2.0),
                (1, 1, 3.0),
                (2, 2, f64::MIN_POSITIVE),
            ],
        )
        .unwrap();
        let a = CsrMatrix::from_triplets(&t);
        let v = csr_to_vbr(&a, &Partition::new(vec![2, 3], vec![2, 3]).unwrap()).unwrap();
        vbr_to_vbrc(&v, |f| {
            if f.rows > 1 {
                Storage::Dense
            } else {
                Storage::Sparse
            }
        })
        .unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = serialize_vbrc(&sample()).unwrap();
        assert_eq!(&bytes[..4], b"VBRC");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..14], &3u64.to_le_bytes());
    }

    #[test]
    fn round_trip() {
        let m = sample();
        assert_eq!(deserialize_vbrc(&serialize_vbrc(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn empty_matrix_round_trip() {
        let v = csr_to_vbr(&CsrMatrix::empty(0, 0), &Partition::whole(0, 0)).unwrap();
        let m = VbrCMatrix::from(v);
        assert_eq!(deserialize_vbrc(&serialize_vbrc(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn corrupt_inputs() {
        let bytes = serialize_vbrc(&sample()).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(deserialize_vbrc(&bad), Err(Error::Ser(_))));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(deserialize_vbrc(&bad), Err(Error::Ser(_))));
        for cut in [3, 10, bytes.len() - 1] {
            assert!(matches!(
                deserialize_vbrc(&bytes[..cut]),
                Err(Error::Ser(_))
            ));
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(deserialize_vbrc(&long), Err(Error::Ser(_))));
    }
}
