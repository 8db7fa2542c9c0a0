//! Timing staged kernels against a compiled CSR baseline.

use std::fmt;

use crate::classify::Storage;
use crate::error::{Error, Result};
use crate::exec::verify::trial_vector;
use crate::formats::{csr_to_vbr, vbr_to_vbrc, VbrCMatrix};
use crate::matrix::{gen_synthetic, CsrMatrix, SyntheticSpec, ValueDomain};
use crate::partition::Partition;
use crate::staging::{build_plan, emit_kernel, EmitOptions, Toolchain};

pub const CSV_HEADER: &str = "matrix,path,threads,repeats,median_ns,speedup";

pub const MIN_REPEATS: usize = 3;

pub const PATH_STAGED: &str = "staged";
pub const PATH_CSR: &str = "csr-reference";

/// Upper bound on baseline block rows; keeps the generated file small while
/// leaving plenty of chunks to balance.
const BASELINE_BLOCK_ROWS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub matrix: String,
    pub path: String,
    pub threads: usize,
    pub repeats: usize,
    pub median_ns: u64,
    /// Baseline median over this path's median; 1.0 for the baseline.
    pub speedup: f64,
}

impl BenchRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{:.4}",
            self.matrix, self.path, self.threads, self.repeats, self.median_ns, self.speedup
        )
    }
}

impl fmt::Display for BenchRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.csv_line())
    }
}

/// The baseline: every entry in the CSR remainder, rows split evenly into at
/// most [`BASELINE_BLOCK_ROWS`] block rows.
pub fn csr_baseline(a: &CsrMatrix) -> Result<VbrCMatrix> {
    let (n, m) = (a.num_rows(), a.num_cols());
    let k = n.min(BASELINE_BLOCK_ROWS);
    let mut cuts: Vec<usize> = (1..=k).map(|b| b * n / k).collect();
    cuts.dedup();
    let cols = if m == 0 { vec![] } else { vec![m] };
    let p = Partition::new(cuts, cols)?;
    let v = csr_to_vbr(a, &p)?;
    vbr_to_vbrc(&v, |_| Storage::Sparse)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub threads: Vec<usize>,
    pub repeats: usize,
    pub emit: EmitOptions,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            threads: vec![1],
            repeats: 5,
            emit: EmitOptions::default(),
            seed: 0,
        }
    }
}

/// Compiles the staged kernel for `staged` and the baseline for `a` once per
/// thread count and records both medians. Outputs of the two kernels must
/// agree exactly on an integer-valued input, otherwise this is an error.
pub fn bench_matrix(
    name: &str,
    a: &CsrMatrix,
    staged: &VbrCMatrix,
    toolchain: &Toolchain,
    cfg: &BenchConfig,
) -> Result<Vec<BenchRecord>> {
    if cfg.repeats < MIN_REPEATS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_REPEATS} repeats are needed for a median, got {}",
            cfg.repeats
        )));
    }
    if cfg.threads.is_empty() || cfg.threads.contains(&0) {
        return Err(Error::InvalidArgument(
            "thread counts must be positive".into(),
        ));
    }
    let baseline = csr_baseline(a)?;
    let staged_plan = build_plan(staged)?;
    let baseline_plan = build_plan(&baseline)?;
    let x = trial_vector(a.num_cols(), ValueDomain::SmallInteger, cfg.seed, 0);
    let mut records = Vec::new();
    for &threads in &cfg.threads {
        let emit = EmitOptions {
            threads,
            ..cfg.emit.clone()
        };
        let staged_kernel = toolchain.compile(&emit_kernel(&staged_plan, &emit)?)?;
        let baseline_kernel = toolchain.compile(&emit_kernel(&baseline_plan, &emit)?)?;
        let base = baseline_kernel.run(&baseline, &x, threads, cfg.repeats)?;
        let fast = staged_kernel.run(staged, &x, threads, cfg.repeats)?;
        if let Some(i) =
            (0..base.y.len()).find(|&i| base.y[i].abs() < 1e15 && base.y[i] != fast.y[i])
        {
            return Err(Error::Run(format!(
                "staged kernel disagrees with baseline at row {i}: {} vs {}",
                fast.y[i], base.y[i]
            )));
        }
        let base_ns = base.median_ns.max(1);
        let fast_ns = fast.median_ns.max(1);
        records.push(BenchRecord {
            matrix: name.to_string(),
            path: PATH_CSR.into(),
            threads,
            repeats: cfg.repeats,
            median_ns: base.median_ns,
            speedup: 1.0,
        });
        records.push(BenchRecord {
            matrix: name.to_string(),
            path: PATH_STAGED.into(),
            threads,
            repeats: cfg.repeats,
            median_ns: fast.median_ns,
            speedup: base_ns as f64 / fast_ns as f64,
        });
    }
    Ok(records)
}

/// One point of the block-density sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub density: f64,
    pub records: Vec<BenchRecord>,
}

/// Synthetic `size x size` matrices with `splits x splits` cells, `cells`
/// of them populated at each density. The grid partition is used as is and
/// every block is forced dense, so the sweep shows where dense storage stops
/// paying off.
pub fn density_sweep(
    size: usize,
    splits: usize,
    cells: usize,
    densities: &[f64],
    toolchain: &Toolchain,
    cfg: &BenchConfig,
) -> Result<Vec<SweepPoint>> {
    densities
        .iter()
        .map(|&density| {
            let spec = SyntheticSpec {
                rows: size,
                cols: size,
                row_splits: splits,
                col_splits: splits,
                nonempty_blocks: cells,
                block_density: density,
                value_domain: ValueDomain::SmallInteger,
                seed: cfg.seed,
            };
            let a = CsrMatrix::from_triplets(&gen_synthetic(&spec)?);
            let (rows, cols) = spec.grid_cuts();
            let v = csr_to_vbr(&a, &Partition::new(rows, cols)?)?;
            let staged = vbr_to_vbrc(&v, |_| Storage::Dense)?;
            let name = format!("sweep-d{density}");
            Ok(SweepPoint {
                density,
                records: bench_matrix(&name, &a, &staged, toolchain, cfg)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape() {
        let r = BenchRecord {
            matrix: "m".into(),
            path: PATH_STAGED.into(),
            threads: 2,
            repeats: 5,
            median_ns: 1200,
            speedup: 1.5,
        };
        assert_eq!(r.csv_line(), "m,staged,2,5,1200,1.5000");
        assert_eq!(
            CSV_HEADER.split(',').count(),
            r.csv_line().split(',').count()
        );
    }

    #[test]
    fn baseline_is_all_remainder() {
        let a = CsrMatrix::from_dense(&crate::matrix::DenseMatrix::from_rows(&[
            [1.0, 0.0, 2.0],
            [0.0, 3.0, 0.0],
        ]));
        let b = csr_baseline(&a).unwrap();
        assert_eq!(b.num_dense_blocks(), 0);
        assert_eq!(b.remainder_nnz(), 3);
        assert_eq!(b.num_block_rows(), 2);
        assert_eq!(b.to_csr().unwrap(), a);
    }
}
