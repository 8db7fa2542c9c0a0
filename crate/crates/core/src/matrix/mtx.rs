//! Matrix Market coordinate reader and writer.
//!
//! Supports `real`, `integer` and `pattern` fields with `general` or
//! `symmetric` symmetry. Symmetric files are expanded to general form and
//! pattern entries take the value 1.0.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::TripletMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_banner(line_no: usize, line: &str) -> Result<(Field, Symmetry)> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(line_no, "missing %%MatrixMarket banner"));
    }
    if tokens[1] != "matrix" {
        return Err(Error::Unsupported(format!("object `{}`", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(Error::Unsupported(format!("format `{}`", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(Error::Unsupported(format!("field `{other}`"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(Error::Unsupported(format!("symmetry `{other}`"))),
    };
    Ok((field, symmetry))
}

fn parse_index(line_no: usize, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line_no, format!("missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|_| parse_err(line_no, format!("bad {what} `{tok}`")))
}

/// Reads a coordinate Matrix Market stream into a normalized triplet matrix.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<TripletMatrix> {
    let mut lines = reader.lines().enumerate();
    let (field, symmetry) = match lines.next() {
        Some((_, line)) => parse_banner(1, &line?)?,
        None => return Err(parse_err(1, "empty input")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut read = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let Some((num_rows, num_cols, declared)) = size else {
            let r = parse_index(line_no, toks.next(), "row count")?;
            let c = parse_index(line_no, toks.next(), "column count")?;
            let n = parse_index(line_no, toks.next(), "entry count")?;
            if toks.next().is_some() {
                return Err(parse_err(line_no, "trailing tokens in size line"));
            }
            size = Some((r, c, n));
            entries.reserve(if symmetry == Symmetry::Symmetric {
                2 * n
            } else {
                n
            });
            continue;
        };
        if read == declared {
            return Err(parse_err(line_no, "more entries than declared"));
        }
        read += 1;
        let row = parse_index(line_no, toks.next(), "row index")?;
        let col = parse_index(line_no, toks.next(), "column index")?;
        if row == 0 || col == 0 || row > num_rows || col > num_cols {
            return Err(Error::Bounds {
                row: row.wrapping_sub(1),
                col: col.wrapping_sub(1),
                num_rows,
                num_cols,
            });
        }
        let value = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => {
                let tok = toks
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing value"))?;
                tok.parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("bad value `{tok}`")))?
            }
        };
        if toks.next().is_some() {
            return Err(parse_err(line_no, "trailing tokens in entry"));
        }
        let (i, j) = (row - 1, col - 1);
        entries.push((i, j, value));
        if symmetry == Symmetry::Symmetric && i != j {
            entries.push((j, i, value));
        }
    }
    let (num_rows, num_cols, declared) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if read != declared {
        return Err(parse_err(
            0,
            format!("declared {declared} entries, found {read}"),
        ));
    }
    TripletMatrix::from_entries(num_rows, num_cols, entries)
}

pub fn read_matrix_market_str(text: &str) -> Result<TripletMatrix> {
    read_matrix_market(text.as_bytes())
}

/// Writes `general` coordinate form. The field is `integer` when every
/// value is integral, `real` otherwise (shortest round-trip formatting).
pub fn write_matrix_market<W: Write>(m: &TripletMatrix, mut out: W) -> Result<()> {
    let integral = m
        .entries()
        .iter()
        .all(|e| e.2.fract() == 0.0 && e.2.abs() < 9.0e15);
    let field = if integral { "integer" } else { "real" };
    writeln!(out, "%%MatrixMarket matrix coordinate {field} general")?;
    writeln!(out, "{} {} {}", m.num_rows(), m.num_cols(), m.nnz())?;
    for &(i, j, v) in m.entries() {
        if integral {
            writeln!(out, "{} {} {}", i + 1, j + 1, v as i64)?;
        } else {
            writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_entry() {
        let m = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 1\n1 1 4.0\n",
        )
        .unwrap();
        assert_eq!((m.num_rows(), m.num_cols()), (2, 2));
        assert_eq!(m.entries(), &[(0, 0, 4.0)]);
    }

    #[test]
    fn symmetric_is_expanded() {
        let m = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 5.0\n",
        )
        .unwrap();
        assert_eq!(m.entries(), &[(0, 1, 5.0), (1, 0, 5.0)]);
    }

    #[test]
    fn pattern_entries_are_one() {
        let m = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate pattern general\n3 3 2\n1 3\n3 1\n",
        )
        .unwrap();
        assert_eq!(m.entries(), &[(0, 2, 1.0), (2, 0, 1.0)]);
    }

    #[test]
    fn duplicates_summed() {
        let m = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 2 3\n1 2 4\n",
        )
        .unwrap();
        assert_eq!(m.entries(), &[(0, 1, 7.0)]);
    }

    #[test]
    fn malformed_header() {
        let err = read_matrix_market_str("%%MatrixMarket matrix\n1 1 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err =
            read_matrix_market_str("%%MatrixMarket matrix coordinate real general\n2 x 1\n1 1 1\n")
                .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn out_of_bounds_index() {
        let err = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Bounds { row: 2, col: 0, .. }));
    }

    #[test]
    fn complex_unsupported() {
        let err = read_matrix_market_str(
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
        let err = read_matrix_market_str("%%MatrixMarket matrix array real general\n1 1\n1\n")
            .unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn write_then_read() {
        let m = TripletMatrix::from_entries(3, 2, vec![(0, 1, 2.5), (2, 0, -1e-7)]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        assert_eq!(read_matrix_market(&buf[..]).unwrap(), m);
    }
}
