mod common;

use std::fs;

use vbrc_core::classify::DecisionModel;
use vbrc_core::exec::verify::trial_vector;
use vbrc_core::exec::{spmv_vbrc_interpret, verify_equivalence, CsrPath, SpmvPath, VbrcPath};
use vbrc_core::formats::{csr_to_vbr, VbrCMatrix};
use vbrc_core::matrix::{gen_synthetic, CsrMatrix, SyntheticSpec, ValueDomain};
use vbrc_core::partition::{partition, PartitionConfig};
use vbrc_core::staging::template::{shim_fill, Fragments, RUNTIME_TEMPLATE};
use vbrc_core::staging::{
    binfmt, build_plan, emit_kernel, CompiledKernelPath, EmitOptions, GeneratedSource,
};
use vbrc_core::Error;

fn hybrid() -> (CsrMatrix, VbrCMatrix) {
    let a = common::hybrid_example();
    let v = csr_to_vbr(&a, &common::example_partition()).unwrap();
    let c = DecisionModel::heuristic(0.5, 1).split(&v).unwrap();
    (a, c)
}

#[test]
fn compiled_matches_oracle_for_each_thread_count() {
    let Some(tc) = common::toolchain_or_skip() else {
        return;
    };
    let (a, c) = hybrid();
    assert!(c.num_dense_blocks() > 0 && c.remainder_nnz() > 0);
    let plan = build_plan(&c).unwrap();
    for threads in [1, 2, 4] {
        let opts = EmitOptions {
            threads,
            ..Default::default()
        };
        let kernel = tc.compile(&emit_kernel(&plan, &opts).unwrap()).unwrap();
        for trial in 0..3 {
            let x = trial_vector(11, ValueDomain::SmallInteger, 5, trial);
            let run = kernel.run(&c, &x, threads, 3).unwrap();
            let expected = spmv_vbrc_interpret(&c, &x).unwrap();
            assert_eq!(run.y, expected, "threads {threads} trial {trial}");
            assert_eq!(run.y, a.spmv(&x).unwrap());
        }
    }
}

#[test]
fn compiled_path_in_equivalence_check() {
    let Some(tc) = common::toolchain_or_skip() else {
        return;
    };
    let spec = SyntheticSpec {
        rows: 120,
        cols: 90,
        row_splits: 6,
        col_splits: 5,
        nonempty_blocks: 12,
        block_density: 0.7,
        value_domain: ValueDomain::Real,
        seed: 11,
    };
    let a = CsrMatrix::from_triplets(&gen_synthetic(&spec).unwrap());
    let v = csr_to_vbr(&a, &partition(&a, &PartitionConfig::default())).unwrap();
    let c = DecisionModel::heuristic(0.5, 16).split(&v).unwrap();
    let plan = build_plan(&c).unwrap();
    let kernel = tc
        .compile(
            &emit_kernel(
                &plan,
                &EmitOptions {
                    threads: 2,
                    ..Default::default()
                },
            )
            .unwrap(),
        )
        .unwrap();
    let compiled = CompiledKernelPath {
        kernel: &kernel,
        matrix: &c,
        threads: 2,
    };
    assert_eq!(compiled.name(), "compiled-t2");
    let paths: [&dyn SpmvPath; 3] = [&CsrPath(&a), &VbrcPath(&c), &compiled];
    let report = verify_equivalence(&a, &paths, 4, ValueDomain::Real, 3).unwrap();
    assert!(report.is_clean(), "{report}");
}

#[test]
fn noop_fragments_write_zeros() {
    let Some(tc) = common::toolchain_or_skip() else {
        return;
    };
    let text = shim_fill(RUNTIME_TEMPLATE, &Fragments::noop()).unwrap();
    let src = GeneratedSource {
        digest: String::new(),
        source_text: text,
        entry_symbol: "vbrc_spmv".into(),
        compile_flags: vec![],
        num_block_rows: 0,
        num_chunks: 1,
    };
    let kernel = tc.compile(&src).unwrap();
    let (_, c) = hybrid();
    let run = kernel.run(&c, &[1.0; 11], 1, 1).unwrap();
    assert_eq!(run.y, vec![0.0; 11]);
}

#[test]
fn wrong_sizes_are_dimension_errors() {
    let Some(tc) = common::toolchain_or_skip() else {
        return;
    };
    let (_, c) = hybrid();
    let kernel = tc
        .compile(&emit_kernel(&build_plan(&c).unwrap(), &EmitOptions::default()).unwrap())
        .unwrap();
    assert!(matches!(
        kernel.run(&c, &[1.0; 10], 1, 1),
        Err(Error::Dim(_))
    ));

    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    binfmt::write_vec(&p("val.bin"), &c.val[1..]).unwrap();
    fs::write(p("csr.bin"), binfmt::encode_remainder(&c)).unwrap();
    binfmt::write_vec(&p("x.bin"), &[1.0; 11]).unwrap();
    let err = kernel
        .run_files(&p("val.bin"), &p("csr.bin"), &p("x.bin"), &p("y.bin"), 1, 1)
        .unwrap_err();
    assert!(matches!(err, Error::Dim(_)), "{err}");

    fs::write(p("x.bin"), b"garbage").unwrap();
    let err = kernel
        .run_files(&p("val.bin"), &p("csr.bin"), &p("x.bin"), &p("y.bin"), 1, 1)
        .unwrap_err();
    assert!(matches!(err, Error::Run(_)), "{err}");
}

#[test]
fn compile_errors_carry_diagnostics() {
    let Some(tc) = common::toolchain_or_skip() else {
        return;
    };
    let src = GeneratedSource {
        source_text: "int main(void) { return undeclared_name; }\n".into(),
        entry_symbol: String::new(),
        compile_flags: vec![],
        digest: String::new(),
        num_block_rows: 0,
        num_chunks: 1,
    };
    match tc.compile(&src) {
        Err(Error::Compile { diagnostics }) => assert!(diagnostics.contains("undeclared_name")),
        other => panic!("expected a compile error, got {other:?}"),
    }
}
