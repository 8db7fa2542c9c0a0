//! Staging: resolve a VBR-C matrix into a plan with literal bounds, emit it
//! as C, and build and run the result.

pub mod binfmt;
mod emit;
mod plan;
pub mod template;
mod toolchain;

pub use emit::{dense_index_expr, emit_kernel, EmitOptions, GeneratedSource, ENTRY_SYMBOL};
pub use plan::{build_plan, BlockRowPlan, DenseLoop, KernelPlan};
pub use template::{shim_fill, Fragments};
pub use toolchain::{
    default_flags, parse_median, CompiledKernel, CompiledKernelPath, KernelRun, Toolchain,
    DEFAULT_FLAGS,
};
