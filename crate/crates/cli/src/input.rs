//! Loading inputs and turning shared options into core configuration.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};

use vbrc_core::classify::{
    calibrate_model, default_calibration_grid, DecisionModel, MicrobenchProbe,
};
use vbrc_core::formats::{deserialize_vbrc, VbrCMatrix, MAGIC};
use vbrc_core::matrix::mtx::read_matrix_market;
use vbrc_core::matrix::CsrMatrix;
use vbrc_core::partition::{partition, Partition, PartitionConfig};
use vbrc_core::staging::{EmitOptions, Toolchain};

use crate::args::{KernelOpts, ModelOpts, PartitionOpts};

pub enum Input {
    Csr(CsrMatrix),
    Vbrc(VbrCMatrix),
}

/// Reads a Matrix Market file or, if it starts with the VBR-C magic, a
/// stored VBR-C matrix.
pub fn load(path: &Path) -> Result<Input> {
    let bytes = fs::read(path).with_context(|| format!("read: cannot open {}", path.display()))?;
    if bytes.starts_with(MAGIC) {
        let m = deserialize_vbrc(&bytes).with_context(|| format!("read: {}", path.display()))?;
        return Ok(Input::Vbrc(m));
    }
    Ok(Input::Csr(load_mtx_bytes(path, &bytes)?))
}

pub fn load_mtx(path: &Path) -> Result<CsrMatrix> {
    match load(path)? {
        Input::Csr(a) => Ok(a),
        Input::Vbrc(_) => bail!(
            "read: {} is a VBR-C file, expected Matrix Market",
            path.display()
        ),
    }
}

fn load_mtx_bytes(path: &Path, bytes: &[u8]) -> Result<CsrMatrix> {
    let t = read_matrix_market(BufReader::new(bytes))
        .with_context(|| format!("read: {}", path.display()))?;
    Ok(CsrMatrix::from_triplets(&t))
}

pub fn partition_config(opts: &PartitionOpts) -> PartitionConfig {
    PartitionConfig {
        cut_threshold: opts.cut_threshold,
        use_shifts: !opts.no_shifts,
    }
}

pub fn build_partition(a: &CsrMatrix, opts: &PartitionOpts) -> Result<Partition> {
    let p = match &opts.partition {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("partition: cannot open {}", path.display()))?
            .parse::<Partition>()
            .with_context(|| format!("partition: {}", path.display()))?,
        None => partition(a, &partition_config(opts)),
    };
    p.check_covers(a.num_rows(), a.num_cols())
        .context("partition")?;
    Ok(p)
}

pub fn build_model(opts: &ModelOpts, seed: u64) -> Result<DecisionModel> {
    let model = if let Some(path) = &opts.model {
        fs::read_to_string(path)
            .with_context(|| format!("classify: cannot open {}", path.display()))?
            .parse::<DecisionModel>()
            .with_context(|| format!("classify: {}", path.display()))?
    } else if opts.calibrate {
        let mut probe = MicrobenchProbe {
            seed,
            ..Default::default()
        };
        calibrate_model(
            &mut probe,
            &default_calibration_grid(),
            5,
            opts.speedup_threshold,
        )
        .context("classify")?
    } else {
        DecisionModel {
            density_floor: opts.density_floor,
            min_elements: opts.min_elements,
            speedup_threshold: opts.speedup_threshold,
            ..Default::default()
        }
    };
    model.validate().context("classify")?;
    if let Some(path) = &opts.save_model {
        fs::write(path, model.to_string())
            .with_context(|| format!("classify: cannot write {}", path.display()))?;
    }
    Ok(model)
}

pub fn toolchain(opts: &KernelOpts) -> Toolchain {
    Toolchain {
        cc: opts.cc.clone(),
        flags: opts.cc_flags.split_whitespace().map(String::from).collect(),
    }
}

pub fn emit_options(opts: &KernelOpts, threads: usize) -> EmitOptions {
    EmitOptions {
        threads,
        unroll_small_blocks: opts.unroll_limit > 0,
        small_block_limit: opts.unroll_limit,
    }
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("write: {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
