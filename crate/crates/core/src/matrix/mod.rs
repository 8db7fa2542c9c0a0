//! Basic sparse representations, Matrix Market ingestion and the synthetic
//! blocked-matrix generator.

mod csr;
mod dense;
pub mod mtx;
pub mod synthetic;
mod triplet;

pub use csr::CsrMatrix;
pub use dense::DenseMatrix;
pub use synthetic::{gen_synthetic, SyntheticSpec, ValueDomain};
pub use triplet::TripletMatrix;
