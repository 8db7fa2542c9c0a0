//! Synthetic blocked matrices: a uniform grid is overlaid on the matrix, a
//! seeded subset of cells is selected, and each selected cell receives
//! `ceil(density * area)` nonzeros at distinct random positions.
//!
//! Every random draw comes from a ChaCha stream keyed by `(seed, stream)`,
//! where stream 0 selects cells and stream `cell + 1` fills cell `cell`.
//! Cell contents therefore do not depend on generation order.

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::TripletMatrix;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueDomain {
    /// Integers in `[1, 9]`; SpMV over these is exact in binary64.
    SmallInteger,
    /// Magnitudes in `[0.5, 1.5)` with random sign.
    Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub cols: usize,
    pub row_splits: usize,
    pub col_splits: usize,
    pub nonempty_blocks: usize,
    pub block_density: f64,
    pub value_domain: ValueDomain,
    pub seed: u64,
}

/// `ceil(density * area)` with slack for products like `0.1 * 30`.
pub fn nonzeros_for(density: f64, area: usize) -> usize {
    let n = (density * area as f64 - 1e-9).ceil();
    (n.max(1.0) as usize).min(area)
}

fn cuts(dim: usize, splits: usize) -> Vec<usize> {
    (1..=splits).map(|k| k * dim / splits).collect()
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.row_splits == 0 || self.row_splits > self.rows {
            return Err(Error::Spec(format!(
                "row_splits {} must be in 1..={}",
                self.row_splits, self.rows
            )));
        }
        if self.col_splits == 0 || self.col_splits > self.cols {
            return Err(Error::Spec(format!(
                "col_splits {} must be in 1..={}",
                self.col_splits, self.cols
            )));
        }
        let cells = self.row_splits * self.col_splits;
        if self.nonempty_blocks > cells {
            return Err(Error::Spec(format!(
                "{} non-empty blocks requested from a {}x{} grid",
                self.nonempty_blocks, self.row_splits, self.col_splits
            )));
        }
        if !(self.block_density > 0.0 && self.block_density <= 1.0) {
            return Err(Error::Spec(format!(
                "block density {} outside (0, 1]",
                self.block_density
            )));
        }
        Ok(())
    }

    /// Cut positions of the overlaid grid (exclusive ends, last = dim).
    pub fn grid_cuts(&self) -> (Vec<usize>, Vec<usize>) {
        (
            cuts(self.rows, self.row_splits),
            cuts(self.cols, self.col_splits),
        )
    }

    /// Grid cells receiving nonzeros, as sorted row-major cell ordinals.
    pub fn selected_cells(&self) -> Vec<usize> {
        let cells = self.row_splits * self.col_splits;
        let mut rng = rng_for(self.seed, 0);
        let mut chosen = index::sample(&mut rng, cells, self.nonempty_blocks).into_vec();
        chosen.sort_unstable();
        chosen
    }
}

fn fill_cell(
    spec: &SyntheticSpec,
    cell: usize,
    row_cuts: &[usize],
    col_cuts: &[usize],
) -> Vec<(usize, usize, f64)> {
    let (br, bc) = (cell / spec.col_splits, cell % spec.col_splits);
    let r0 = if br == 0 { 0 } else { row_cuts[br - 1] };
    let c0 = if bc == 0 { 0 } else { col_cuts[bc - 1] };
    let (h, w) = (row_cuts[br] - r0, col_cuts[bc] - c0);
    let area = h * w;
    let count = nonzeros_for(spec.block_density, area);

    let mut rng = rng_for(spec.seed, cell as u64 + 1);
    let mut positions = index::sample(&mut rng, area, count).into_vec();
    positions.sort_unstable();
    positions
        .into_iter()
        .map(|p| {
            let value = match spec.value_domain {
                ValueDomain::SmallInteger => rng.gen_range(1..=9) as f64,
                ValueDomain::Real => {
                    let magnitude: f64 = rng.gen_range(0.5..1.5);
                    if rng.gen_bool(0.5) {
                        -magnitude
                    } else {
                        magnitude
                    }
                }
            };
            (r0 + p / w, c0 + p % w, value)
        })
        .collect()
}

/// Generates the matrix described by `spec`. Deterministic for a fixed seed.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<TripletMatrix> {
    spec.validate()?;
    let (row_cuts, col_cuts) = spec.grid_cuts();
    let cells = spec.selected_cells();
    let filled = par::map(&cells, |&cell| fill_cell(spec, cell, &row_cuts, &col_cuts));
    let entries = filled.into_iter().flatten().collect();
    TripletMatrix::from_entries(spec.rows, spec.cols, entries)
}
