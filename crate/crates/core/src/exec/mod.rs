//! Execution paths: single-threaded reference interpreters, the in-process
//! executor for staged plans, and cross-path equivalence checking.

mod native;
mod oracle;
pub mod verify;

pub use native::{execute_plan, execute_plan_seq};
pub use oracle::{spmv_vbr_interpret, spmv_vbrc_interpret};
pub use verify::{
    verify_equivalence, CsrPath, Divergence, NativePlanPath, SpmvPath, VbrPath, VbrcPath,
    VerifyReport,
};
