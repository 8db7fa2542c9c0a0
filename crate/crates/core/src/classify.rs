//! Per-block dense/sparse decisions and the matrix-level suitability gate.
//!
//! Two decision modes exist. The heuristic mode stores a block densely when
//! its fill exceeds a floor and its area clears a minimum. The table mode
//! looks up the nearest calibrated cell in `(ln rows, ln cols, density)`
//! space and stores the block densely when the measured dense-over-sparse
//! speedup reaches the threshold.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::formats::{vbr_to_vbrc, VbrCMatrix, VbrMatrix};
use crate::matrix::synthetic::{nonzeros_for, rng_for};
use crate::matrix::CsrMatrix;
use crate::partition::{grid_stats, BlockStats, Partition};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockFeatures {
    pub rows: usize,
    pub cols: usize,
    pub density: f64,
}

impl BlockFeatures {
    pub fn area(&self) -> usize {
        self.rows * self.cols
    }
}

impl From<&BlockStats> for BlockFeatures {
    fn from(s: &BlockStats) -> Self {
        BlockFeatures {
            rows: s.rows,
            cols: s.cols,
            density: s.density,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Storage {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelMode {
    Heuristic,
    Table,
}

/// One calibration measurement: dense kernel speedup over CSR for a block
/// with these features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableCell {
    pub rows: usize,
    pub cols: usize,
    pub density: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionModel {
    pub mode: ModelMode,
    pub density_floor: f64,
    pub min_elements: usize,
    pub speedup_threshold: f64,
    pub table: Vec<TableCell>,
}

impl Default for DecisionModel {
    fn default() -> Self {
        DecisionModel {
            mode: ModelMode::Heuristic,
            density_floor: 0.5,
            min_elements: 64,
            speedup_threshold: 1.3,
            table: Vec::new(),
        }
    }
}

impl DecisionModel {
    pub fn heuristic(density_floor: f64, min_elements: usize) -> Self {
        DecisionModel {
            density_floor,
            min_elements,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.density_floor) {
            return Err(Error::Model(format!(
                "density floor {} outside [0, 1]",
                self.density_floor
            )));
        }
        if self.speedup_threshold.is_nan() || self.speedup_threshold < 1.0 {
            return Err(Error::Model(format!(
                "speedup threshold {} below 1",
                self.speedup_threshold
            )));
        }
        if let Some(c) = self
            .table
            .iter()
            .find(|c| c.speedup.is_nan() || c.speedup <= 0.0 || c.rows == 0 || c.cols == 0)
        {
            return Err(Error::Model(format!("invalid table cell {c:?}")));
        }
        if self.mode == ModelMode::Table && self.table.is_empty() {
            return Err(Error::Model("table mode with an empty table".into()));
        }
        Ok(())
    }

    fn nearest(&self, f: &BlockFeatures) -> &TableCell {
        let key = |r: usize, c: usize, d: f64| ((r as f64).ln(), (c as f64).ln(), d);
        let (r, c, d) = key(f.rows, f.cols, f.density);
        self.table
            .iter()
            .map(|cell| {
                let (cr, cc, cd) = key(cell.rows, cell.cols, cell.density);
                ((r - cr).powi(2) + (c - cc).powi(2) + (d - cd).powi(2), cell)
            })
            // first cell wins ties
            .fold(None::<(f64, &TableCell)>, |best, cur| match best {
                Some(b) if b.0 <= cur.0 => Some(b),
                _ => Some(cur),
            })
            .map(|(_, cell)| cell)
            .expect("non-empty table")
    }

    fn decide(&self, f: &BlockFeatures) -> Storage {
        let dense = match self.mode {
            ModelMode::Heuristic => f.density > self.density_floor && f.area() >= self.min_elements,
            ModelMode::Table => self.nearest(f).speedup >= self.speedup_threshold,
        };
        if dense {
            Storage::Dense
        } else {
            Storage::Sparse
        }
    }

    pub fn classify_block(&self, f: &BlockFeatures) -> Result<Storage> {
        if self.mode == ModelMode::Table && self.table.is_empty() {
            return Err(Error::Model("table mode with an empty table".into()));
        }
        Ok(self.decide(f))
    }

    /// Converts `m` to VBR-C using this model for every block.
    pub fn split(&self, m: &VbrMatrix) -> Result<VbrCMatrix> {
        self.validate()?;
        vbr_to_vbrc(m, |f| self.decide(f))
    }
}

impl fmt::Display for DecisionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            ModelMode::Heuristic => "heuristic",
            ModelMode::Table => "table",
        };
        writeln!(
            f,
            "mode={mode} density_floor={} min_elements={} speedup_threshold={}",
            self.density_floor, self.min_elements, self.speedup_threshold
        )?;
        for c in &self.table {
            writeln!(f, "{} {} {} {}", c.rows, c.cols, c.density, c.speedup)?;
        }
        Ok(())
    }
}

fn model_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

impl FromStr for DecisionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hline, header) = lines.next().ok_or_else(|| model_err(1, "empty model"))?;
        let mut model = DecisionModel::default();
        for tok in header.split_whitespace() {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| model_err(hline + 1, format!("expected key=value, got `{tok}`")))?;
            let bad = || model_err(hline + 1, format!("bad value for {key}: `{value}`"));
            match key {
                "mode" => {
                    model.mode = match value {
                        "heuristic" => ModelMode::Heuristic,
                        "table" => ModelMode::Table,
                        _ => return Err(bad()),
                    }
                }
                "density_floor" => model.density_floor = value.parse().map_err(|_| bad())?,
                "min_elements" => model.min_elements = value.parse().map_err(|_| bad())?,
                "speedup_threshold" => {
                    model.speedup_threshold = value.parse().map_err(|_| bad())?
                }
                _ => return Err(model_err(hline + 1, format!("unknown key `{key}`"))),
            }
        }
        for (n, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let bad = || model_err(n + 1, "expected `rows cols density speedup`");
            if toks.len() != 4 {
                return Err(bad());
            }
            model.table.push(TableCell {
                rows: toks[0].parse().map_err(|_| bad())?,
                cols: toks[1].parse().map_err(|_| bad())?,
                density: toks[2].parse().map_err(|_| bad())?,
                speedup: toks[3].parse().map_err(|_| bad())?,
            });
        }
        model.validate()?;
        Ok(model)
    }
}

/// Measures how much faster a dense loop nest is than CSR on a block with
/// the given features.
pub trait KernelProbe {
    /// Returns `csr_median / dense_median` over `repeats` timed runs.
    fn speedup(&mut self, features: &BlockFeatures, repeats: usize) -> Result<f64>;
}

/// In-process microbenchmark: one seeded block per feature triple, timed
/// with a warm-up run and median-of-repeats for each kernel.
#[derive(Debug, Clone)]
pub struct MicrobenchProbe {
    pub seed: u64,
    /// Multiply-adds per timed sample; small blocks are looped to reach it.
    pub work_per_sample: usize,
}

impl Default for MicrobenchProbe {
    fn default() -> Self {
        MicrobenchProbe {
            seed: 0x5eed,
            work_per_sample: 1 << 16,
        }
    }
}

pub(crate) fn median_u128(samples: &mut [u128]) -> u128 {
    samples.sort_unstable();
    samples[samples.len() / 2]
}

fn time_median<F: FnMut()>(repeats: usize, iters: usize, mut f: F) -> u128 {
    for _ in 0..iters {
        f();
    }
    let mut samples: Vec<u128> = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..iters {
                f();
            }
            start.elapsed().as_nanos()
        })
        .collect();
    median_u128(&mut samples).max(1)
}

impl KernelProbe for MicrobenchProbe {
    fn speedup(&mut self, f: &BlockFeatures, repeats: usize) -> Result<f64> {
        if f.rows == 0 || f.cols == 0 || !(f.density > 0.0 && f.density <= 1.0) {
            return Err(Error::Calibration(format!("invalid features {f:?}")));
        }
        let area = f.area();
        let nnz = nonzeros_for(f.density, area);
        let mut rng = rng_for(self.seed, (f.rows * 7919 + f.cols) as u64);
        let mut pos = index::sample(&mut rng, area, nnz).into_vec();
        // row-major positions give a valid CSR ordering
        pos.sort_unstable();

        let (h, w) = (f.rows, f.cols);
        let mut dense = vec![0.0; area];
        let mut row_ptr = vec![0usize; h + 1];
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for &p in &pos {
            let (i, j) = (p / w, p % w);
            dense[j * h + i] = 1.0 + (p % 7) as f64;
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(1.0 + (p % 7) as f64);
        }
        for i in 0..h {
            row_ptr[i + 1] += row_ptr[i];
        }
        let x: Vec<f64> = (0..w).map(|j| 1.0 + j as f64 * 1e-3).collect();
        let mut y = vec![0.0; h];
        let iters = (self.work_per_sample / area).max(1);
        let repeats = repeats.max(1);

        let dense_ns = time_median(repeats, iters, || {
            for j in 0..w {
                let xj = x[j];
                let col = &dense[j * h..(j + 1) * h];
                for (yi, a) in y.iter_mut().zip(col) {
                    *yi += a * xj;
                }
            }
            black_box(&mut y);
        });
        let csr_ns = time_median(repeats, iters, || {
            for i in 0..h {
                let mut acc = y[i];
                for k in row_ptr[i]..row_ptr[i + 1] {
                    acc += vals[k] * x[cols[k]];
                }
                y[i] = acc;
            }
            black_box(&mut y);
        });
        Ok(csr_ns as f64 / dense_ns as f64)
    }
}

/// Builds a table-mode model by probing every grid point. Probes run
/// strictly one after another.
pub fn calibrate_model<P: KernelProbe + ?Sized>(
    probe: &mut P,
    grid: &[BlockFeatures],
    repeats: usize,
    speedup_threshold: f64,
) -> Result<DecisionModel> {
    let mut table = Vec::with_capacity(grid.len());
    for f in grid {
        let speedup = probe.speedup(f, repeats).map_err(|e| match e {
            Error::Calibration(_) => e,
            other => Error::Calibration(other.to_string()),
        })?;
        if !(speedup.is_finite() && speedup > 0.0) {
            return Err(Error::Calibration(format!(
                "probe returned speedup {speedup} for {f:?}"
            )));
        }
        table.push(TableCell {
            rows: f.rows,
            cols: f.cols,
            density: f.density,
            speedup,
        });
    }
    let model = DecisionModel {
        mode: ModelMode::Table,
        speedup_threshold,
        table,
        ..Default::default()
    };
    model.validate()?;
    Ok(model)
}

/// Log-spaced square-ish block sizes crossed with a density sweep.
pub fn default_calibration_grid() -> Vec<BlockFeatures> {
    let sizes = [1usize, 2, 4, 8, 16, 32, 64];
    let densities = [0.1, 0.25, 0.5, 0.75, 1.0];
    let mut grid = Vec::new();
    for &rows in &sizes {
        for &cols in &sizes {
            for &density in &densities {
                grid.push(BlockFeatures {
                    rows,
                    cols,
                    density,
                });
            }
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDecision {
    pub stats: BlockStats,
    pub storage: Storage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuitabilityReport {
    pub suitable: bool,
    pub dense_block_count: usize,
    /// Fraction of the matrix's nonzeros inside dense-classified blocks.
    pub dense_coverage: f64,
    pub decisions: Vec<BlockDecision>,
}

impl fmt::Display for SuitabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suitable: {}", self.suitable)?;
        writeln!(f, "blocks: {}", self.decisions.len())?;
        writeln!(f, "dense_blocks: {}", self.dense_block_count)?;
        writeln!(f, "dense_coverage: {:.6}", self.dense_coverage)?;
        for d in &self.decisions {
            let s = &d.stats;
            writeln!(
                f,
                "block {},{} rows {}..{} cols {}..{} nnz {} density {:.4} {}",
                s.block_row,
                s.block_col,
                s.row_start,
                s.row_start + s.rows,
                s.col_start,
                s.col_start + s.cols,
                s.nnz,
                s.density,
                match d.storage {
                    Storage::Dense => "dense",
                    Storage::Sparse => "sparse",
                }
            )?;
        }
        Ok(())
    }
}

/// Classifies every non-empty grid cell. The matrix is suitable exactly when
/// at least one block is classified dense.
pub fn assess_matrix(
    a: &CsrMatrix,
    p: &Partition,
    model: &DecisionModel,
) -> Result<SuitabilityReport> {
    model.validate()?;
    let stats = grid_stats(a, p)?;
    let decisions: Vec<BlockDecision> = stats
        .into_iter()
        .map(|stats| BlockDecision {
            storage: model.decide(&BlockFeatures::from(&stats)),
            stats,
        })
        .collect();
    let dense_block_count = decisions
        .iter()
        .filter(|d| d.storage == Storage::Dense)
        .count();
    let dense_nnz: usize = decisions
        .iter()
        .filter(|d| d.storage == Storage::Dense)
        .map(|d| d.stats.nnz)
        .sum();
    let dense_coverage = if a.nnz() == 0 {
        0.0
    } else {
        dense_nnz as f64 / a.nnz() as f64
    };
    Ok(SuitabilityReport {
        suitable: dense_block_count >= 1,
        dense_block_count,
        dense_coverage,
        decisions,
    })
}
