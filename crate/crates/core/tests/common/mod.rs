#![allow(dead_code)]

use vbrc_core::matrix::{CsrMatrix, DenseMatrix};
use vbrc_core::partition::Partition;

/// The 11x11 worked example with its hand partition.
pub const EXAMPLE_ROWS: [[f64; 11]; 11] = [
    [4., 2., 0., 0., 0., 1., 0., 0., 0., -1., 1.],
    [1., 5., 0., 0., 0., 2., 0., 0., 0., 0., -1.],
    [0., 0., 6., 1., 2., 2., 0., 0., 0., 0., 0.],
    [0., 0., 2., 7., 1., 0., 0., 0., 0., 0., 0.],
    [0., 0., -1., 2., 9., 3., 0., 0., 0., 0., 0.],
    [2., 1., 3., 4., 5., 10., 4., 3., 2., 0., 0.],
    [0., 0., 0., 0., 0., 4., 13., 4., 2., 0., 0.],
    [0., 0., 0., 0., 0., 3., 3., 11., 3., 0., 0.],
    [0., 0., 0., 0., 0., 0., 2., 0., 7., 0., 0.],
    [8., 4., 0., 0., 0., 0., 0., 0., 0., 25., 3.],
    [-2., 3., 0., 0., 0., 0., 0., 0., 0., 8., 12.],
];

pub const EXAMPLE_CUTS: [usize; 5] = [2, 5, 6, 9, 11];

pub fn example_dense() -> DenseMatrix {
    DenseMatrix::from_rows(&EXAMPLE_ROWS)
}

pub fn example() -> CsrMatrix {
    CsrMatrix::from_dense(&example_dense())
}

/// The example with three corner entries removed, which turns two of its
/// blocks sparse-looking.
pub fn hybrid_example() -> CsrMatrix {
    let mut d = example_dense();
    d.set(0, 9, 0.0);
    d.set(9, 10, 0.0);
    d.set(10, 10, 0.0);
    CsrMatrix::from_dense(&d)
}

pub fn example_partition() -> Partition {
    Partition::new(EXAMPLE_CUTS.to_vec(), EXAMPLE_CUTS.to_vec()).unwrap()
}

pub fn toolchain_or_skip() -> Option<vbrc_core::staging::Toolchain> {
    let tc = vbrc_core::staging::Toolchain::from_env();
    if tc.is_available() {
        Some(tc)
    } else {
        eprintln!("skipping: C compiler `{}` not available", tc.cc);
        None
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vbrc_core::classify::DecisionModel;
use vbrc_core::formats::{csr_to_vbr, VbrCMatrix, VbrMatrix};
use vbrc_core::matrix::{gen_synthetic, SyntheticSpec, ValueDomain};
use vbrc_core::partition::{partition, PartitionConfig};

/// A feasible synthetic spec with dimensions up to `max_dim`, drawn from
/// `seed`.
pub fn random_spec(seed: u64, max_dim: usize, domain: ValueDomain) -> SyntheticSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.gen_range(1..=max_dim);
    let cols = rng.gen_range(1..=max_dim);
    let row_splits = rng.gen_range(1..=rows.min(16));
    let col_splits = rng.gen_range(1..=cols.min(16));
    let cells = row_splits * col_splits;
    SyntheticSpec {
        rows,
        cols,
        row_splits,
        col_splits,
        nonempty_blocks: rng.gen_range(0..=cells.min(24)),
        block_density: rng.gen_range(0.05..=1.0),
        value_domain: domain,
        seed: rng.gen(),
    }
}

/// Partitions `a` with the default partitioner and splits it with a model
/// whose floor and size cut-off vary with `seed`, so both storage kinds
/// show up.
pub fn stage(a: &CsrMatrix, seed: u64) -> (VbrMatrix, VbrCMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let v = csr_to_vbr(a, &partition(a, &PartitionConfig::default())).unwrap();
    let model = DecisionModel::heuristic(rng.gen_range(0.0..0.9), rng.gen_range(1..32));
    let c = model.split(&v).unwrap();
    (v, c)
}

pub fn random_staged(
    seed: u64,
    max_dim: usize,
    domain: ValueDomain,
) -> (CsrMatrix, VbrMatrix, VbrCMatrix) {
    let a = CsrMatrix::from_triplets(&gen_synthetic(&random_spec(seed, max_dim, domain)).unwrap());
    let (v, c) = stage(&a, seed);
    (a, v, c)
}
