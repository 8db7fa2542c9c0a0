//! Variable-block sparse matrices and specialized SpMV kernels.
//!
//! The pipeline: read a CSR matrix, cut it into variable-sized blocks by
//! comparing neighbouring row and column patterns, store it as VBR, decide
//! per block between dense and sparse storage (VBR-C), then emit and compile
//! a C kernel whose loop bounds and value offsets are literal integers.
//! Interpreters for both block formats act as oracles for every step.

pub mod bench;
pub mod classify;
pub mod error;
pub mod exec;
pub mod formats;
pub mod matrix;
mod par;
pub mod partition;
pub mod staging;

pub use error::{Error, Result};

/// Whether the data-parallel paths are compiled in.
pub const PARALLEL: bool = par::ENABLED;
