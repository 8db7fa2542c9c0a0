//! Similarity-driven row/column partitioning into a variable-sized grid.
//!
//! Adjacent rows are compared by the overlap of their nonzero patterns,
//! normalized by the larger pattern. With shifts enabled the overlap is the
//! best of the aligned pattern and the pattern moved one position either
//! way, so staircase-like structure still merges. A cut goes between rows
//! whose similarity falls strictly below the threshold; runs of empty rows
//! are absorbed into a single block row. Columns are handled the same way on
//! the transpose.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionConfig {
    pub cut_threshold: f64,
    pub use_shifts: bool,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            cut_threshold: 0.5,
            use_shifts: true,
        }
    }
}

/// Row and column cut positions. Each list is strictly increasing, every
/// entry lies in `(0, dim]` and the last entry equals `dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    row_indices: Vec<usize>,
    col_indices: Vec<usize>,
}

fn check_cuts(cuts: &[usize], dim: usize, what: &str) -> Result<()> {
    if dim == 0 {
        return if cuts.is_empty() {
            Ok(())
        } else {
            Err(Error::dim(format!(
                "{what} cuts given for an empty dimension"
            )))
        };
    }
    if cuts.last() != Some(&dim) {
        return Err(Error::dim(format!("{what} cuts must end at {dim}")));
    }
    if cuts[0] == 0 || cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::dim(format!(
            "{what} cuts must be strictly increasing and positive"
        )));
    }
    Ok(())
}

impl Partition {
    pub fn new(row_indices: Vec<usize>, col_indices: Vec<usize>) -> Result<Self> {
        let num_rows = row_indices.last().copied().unwrap_or(0);
        let num_cols = col_indices.last().copied().unwrap_or(0);
        check_cuts(&row_indices, num_rows, "row")?;
        check_cuts(&col_indices, num_cols, "column")?;
        Ok(Partition {
            row_indices,
            col_indices,
        })
    }

    /// A single block covering the whole matrix.
    pub fn whole(num_rows: usize, num_cols: usize) -> Self {
        let one = |d: usize| if d == 0 { vec![] } else { vec![d] };
        Partition {
            row_indices: one(num_rows),
            col_indices: one(num_cols),
        }
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_indices
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn num_rows(&self) -> usize {
        self.row_indices.last().copied().unwrap_or(0)
    }

    pub fn num_cols(&self) -> usize {
        self.col_indices.last().copied().unwrap_or(0)
    }

    pub fn num_block_rows(&self) -> usize {
        self.row_indices.len()
    }

    pub fn num_block_cols(&self) -> usize {
        self.col_indices.len()
    }

    /// Block-row start positions, `[0] ++ row_indices`.
    pub fn rpntr(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.row_indices.iter().copied())
            .collect()
    }

    /// Block-column start positions, `[0] ++ col_indices`.
    pub fn cpntr(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.col_indices.iter().copied())
            .collect()
    }

    pub fn check_covers(&self, num_rows: usize, num_cols: usize) -> Result<()> {
        if self.num_rows() != num_rows || self.num_cols() != num_cols {
            return Err(Error::dim(format!(
                "partition covers {}x{}, matrix is {}x{}",
                self.num_rows(),
                self.num_cols(),
                num_rows,
                num_cols
            )));
        }
        Ok(())
    }
}

fn join_list(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim().parse::<usize>().map_err(|_| Error::Parse {
                line: 0,
                msg: format!("bad cut index `{t}`"),
            })
        })
        .collect()
}

/// Two lines, `rows: a,b,c` and `cols: a,b,c`.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows: {}", join_list(&self.row_indices))?;
        writeln!(f, "cols: {}", join_list(&self.col_indices))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rows = None;
        let mut cols = None;
        for (n, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, list) = line.split_once(':').ok_or_else(|| Error::Parse {
                line: n + 1,
                msg: "expected `rows:` or `cols:`".into(),
            })?;
            match key.trim() {
                "rows" => rows = Some(parse_list(list)?),
                "cols" => cols = Some(parse_list(list)?),
                other => {
                    return Err(Error::Parse {
                        line: n + 1,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        match (rows, cols) {
            (Some(r), Some(c)) => Partition::new(r, c),
            _ => Err(Error::Parse {
                line: 0,
                msg: "partition needs both rows and cols".into(),
            }),
        }
    }
}

/// Size of `{x + offset : x in u} ∩ v` for sorted sets.
fn shifted_overlap(u: &[usize], v: &[usize], offset: isize) -> usize {
    let (mut a, mut b, mut count) = (0, 0, 0);
    while a < u.len() && b < v.len() {
        let ua = u[a] as isize + offset;
        let vb = v[b] as isize;
        match ua.cmp(&vb) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                a += 1;
                b += 1;
            }
        }
    }
    count
}

/// Pattern similarity of two sorted index sets, in `[0, 1]`.
///
/// Two empty sets are defined to be identical (1.0).
pub fn pattern_similarity(u: &[usize], v: &[usize], use_shifts: bool) -> f64 {
    let denom = u.len().max(v.len());
    if denom == 0 {
        return 1.0;
    }
    let mut overlap = shifted_overlap(u, v, 0);
    if use_shifts {
        overlap = overlap
            .max(shifted_overlap(u, v, 1))
            .max(shifted_overlap(u, v, -1));
    }
    overlap as f64 / denom as f64
}

/// Cut positions along one dimension, where `pattern(i)` is the sorted
/// nonzero index set of line `i`.
pub fn cut_positions<'a, F>(n: usize, pattern: F, cfg: &PartitionConfig) -> Vec<usize>
where
    F: Fn(usize) -> &'a [usize],
{
    let mut cuts = Vec::new();
    let mut i = 0;
    while i + 1 < n {
        if pattern(i).is_empty() {
            while i + 1 < n && pattern(i + 1).is_empty() {
                i += 1;
            }
            cuts.push(i + 1);
        } else if pattern_similarity(pattern(i), pattern(i + 1), cfg.use_shifts) < cfg.cut_threshold
        {
            cuts.push(i + 1);
        }
        i += 1;
    }
    if n > 0 && cuts.last() != Some(&n) {
        cuts.push(n);
    }
    cuts
}

pub fn partition(a: &CsrMatrix, cfg: &PartitionConfig) -> Partition {
    let (row_indices, col_indices) = par::join(
        || cut_positions(a.num_rows(), |i| a.row(i).0, cfg),
        || {
            let t = a.transpose();
            cut_positions(t.num_rows(), |j| t.row(j).0, cfg)
        },
    );
    Partition {
        row_indices,
        col_indices,
    }
}

/// Shape and fill of one non-empty grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStats {
    pub block_row: usize,
    pub block_col: usize,
    pub row_start: usize,
    pub rows: usize,
    pub col_start: usize,
    pub cols: usize,
    pub nnz: usize,
    pub density: f64,
}

/// Maps every position along a dimension to its block index.
pub(crate) fn block_lookup(starts: &[usize]) -> Vec<usize> {
    let n = starts.last().copied().unwrap_or(0);
    let mut lookup = vec![0; n];
    for b in 0..starts.len() - 1 {
        lookup[starts[b]..starts[b + 1]].fill(b);
    }
    lookup
}

/// One record per grid cell with at least one nonzero, ordered block-row
/// major then by block column.
pub fn grid_stats(a: &CsrMatrix, p: &Partition) -> Result<Vec<BlockStats>> {
    p.check_covers(a.num_rows(), a.num_cols())?;
    let rpntr = p.rpntr();
    let cpntr = p.cpntr();
    let col_block = block_lookup(&cpntr);
    let per_row = par::map_range(p.num_block_rows(), |br| {
        let mut counts = vec![0usize; p.num_block_cols()];
        for i in rpntr[br]..rpntr[br + 1] {
            for &c in a.row(i).0 {
                counts[col_block[c]] += 1;
            }
        }
        let rows = rpntr[br + 1] - rpntr[br];
        counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(bc, &nnz)| {
                let cols = cpntr[bc + 1] - cpntr[bc];
                BlockStats {
                    block_row: br,
                    block_col: bc,
                    row_start: rpntr[br],
                    rows,
                    col_start: cpntr[bc],
                    cols,
                    nnz,
                    density: nnz as f64 / (rows * cols) as f64,
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(per_row.into_iter().flatten().collect())
}
