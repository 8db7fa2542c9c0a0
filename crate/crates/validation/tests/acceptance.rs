//! Acceptance criteria, one PASS/FAIL line each. Runs with its own `main`
//! so every criterion is attempted and reported even when some fail.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vbrc_core::bench::{bench_matrix, density_sweep, BenchConfig, PATH_STAGED};
use vbrc_core::classify::{assess_matrix, DecisionModel, Storage};
use vbrc_core::exec::verify::trial_vector;
use vbrc_core::exec::{spmv_vbr_interpret, spmv_vbrc_interpret};
use vbrc_core::formats::{csr_to_vbr, deserialize_vbrc, serialize_vbrc, vbr_to_vbrc};
use vbrc_core::matrix::{
    gen_synthetic, CsrMatrix, DenseMatrix, SyntheticSpec, TripletMatrix, ValueDomain,
};
use vbrc_core::partition::{partition, pattern_similarity, Partition, PartitionConfig};
use vbrc_core::staging::{build_plan, emit_kernel, DenseLoop, EmitOptions, KernelPlan};

type Outcome = Result<String, String>;

struct Runner {
    failed: Vec<String>,
}

impl Runner {
    fn run(&mut self, tier: &str, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let mut outcome = f();
        let elapsed = start.elapsed();
        if outcome.is_ok() && elapsed > budget {
            outcome = Err(format!("took {elapsed:.2?}, budget {budget:?}"));
        }
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "{tag} [{tier}] {name} ({:.2}s): {detail}",
            elapsed.as_secs_f64()
        );
        if outcome.is_err() {
            self.failed.push(format!("[{tier}] {name}"));
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ints(v: &[i64]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

fn example_vbr() -> Outcome {
    let v =
        csr_to_vbr(&common::example(), &common::example_partition()).map_err(|e| e.to_string())?;
    let val = ints(&[
        4, 1, 2, 5, 1, 2, -1, 0, 1, -1, 6, 2, -1, 1, 7, 2, 2, 1, 9, 2, 0, 3, 2, 1, 3, 4, 5, 10, 4,
        3, 2, 4, 3, 0, 13, 3, 2, 4, 11, 0, 2, 3, 7, 8, -2, 4, 3, 25, 8, 3, 12,
    ]);
    check(v.val == val, || format!("Val = {:?}", v.val))?;
    check(
        v.indx == [0, 4, 6, 10, 19, 22, 24, 27, 28, 31, 34, 43, 47, 51],
        || format!("Indx = {:?}", v.indx),
    )?;
    check(v.bindx == [0, 2, 4, 1, 2, 0, 1, 2, 3, 2, 3, 0, 4], || {
        format!("Bindx = {:?}", v.bindx)
    })?;
    check(v.rpntr == [0, 2, 5, 6, 9, 11], || {
        format!("Rpntr = {:?}", v.rpntr)
    })?;
    check(v.cpntr == [0, 2, 5, 6, 9, 11], || {
        format!("Cpntr = {:?}", v.cpntr)
    })?;
    check(v.bpntrb == [0, 3, 5, 9, 11], || {
        format!("Bpntrb = {:?}", v.bpntrb)
    })?;
    check(v.bpntre == [3, 5, 9, 11, 13], || {
        format!("Bpntre = {:?}", v.bpntre)
    })?;
    Ok("all seven arrays match".into())
}

fn hybrid_with_floor(floor: f64) -> Result<vbrc_core::formats::VbrCMatrix, String> {
    let v = csr_to_vbr(&common::hybrid_example(), &common::example_partition())
        .map_err(|e| e.to_string())?;
    // the density rule alone: no minimum block size
    DecisionModel::heuristic(floor, 1)
        .split(&v)
        .map_err(|e| e.to_string())
}

fn example_vbrc() -> Outcome {
    let c = hybrid_with_floor(0.5)?;
    let want_csr_val = ints(&[1, -1, 2, 3, 4, 3, 25, 8]);
    let ok = c.ublocks == [2, 4, 9, 12]
        && c.indptr == [0, 1, 2, 3, 3, 4, 4, 5, 6, 6, 7, 8]
        && c.indices == [10, 10, 5, 5, 5, 5, 9, 9]
        && c.csr_val == want_csr_val;
    if ok {
        return Ok("ublocks, indptr, indices, csr_val match".into());
    }
    let alt = hybrid_with_floor(2.0 / 3.0)?;
    Err(format!(
        "density > 0.5 gives ublocks={:?} indptr={:?} indices={:?} csr_val={:?}; blocks 4 and 9 are 3x1 at density 2/3 and stay dense. \
         (floor 2/3 gives ublocks={:?}, csr_val={:?})",
        c.ublocks, c.indptr, c.indices, c.csr_val, alt.ublocks, alt.csr_val
    ))
}

/// Brute-force pattern similarity on dense 0/1 vectors: the best of the
/// plain, right-shifted and left-shifted dot products over the larger
/// nonzero count.
fn brute_similarity(u: &[f64], v: &[f64], shifts: bool) -> f64 {
    let n = u.len();
    let pu: Vec<u8> = u.iter().map(|&x| (x != 0.0) as u8).collect();
    let pv: Vec<u8> = v.iter().map(|&x| (x != 0.0) as u8).collect();
    let dot = |s: isize| -> usize {
        (0..n as isize)
            .filter(|&k| k + s >= 0 && k + s < n as isize)
            .map(|k| (pu[k as usize] * pv[(k + s) as usize]) as usize)
            .sum()
    };
    let mut best = dot(0);
    if shifts {
        best = best.max(dot(1)).max(dot(-1));
    }
    let denom = pu
        .iter()
        .map(|&b| b as usize)
        .sum::<usize>()
        .max(pv.iter().map(|&b| b as usize).sum());
    if denom == 0 {
        1.0
    } else {
        best as f64 / denom as f64
    }
}

fn pattern(d: &DenseMatrix, line: usize, by_col: bool) -> (Vec<f64>, Vec<usize>) {
    let n = d.num_rows();
    let dense: Vec<f64> = (0..n)
        .map(|k| {
            if by_col {
                d.get(k, line)
            } else {
                d.get(line, k)
            }
        })
        .collect();
    let set = (0..n).filter(|&k| dense[k] != 0.0).collect();
    (dense, set)
}

fn partitioner_fidelity() -> Outcome {
    let d = common::example_dense();
    let mut worst: f64 = 0.0;
    let mut sims = [Vec::new(), Vec::new()];
    for (axis, by_col) in [(0, false), (1, true)] {
        for i in 0..10 {
            let (du, su) = pattern(&d, i, by_col);
            let (dv, sv) = pattern(&d, i + 1, by_col);
            let brute = brute_similarity(&du, &dv, true);
            let fast = pattern_similarity(&su, &sv, true);
            worst = worst.max((brute - fast).abs());
            sims[axis].push(format!("{brute:.3}"));
        }
    }
    check(worst <= 1e-15, || {
        format!("similarity disagreement {worst:e}")
    })?;
    let p = partition(&common::example(), &PartitionConfig::default());
    let want = common::EXAMPLE_CUTS;
    let plain = partition(
        &common::example(),
        &PartitionConfig {
            cut_threshold: 0.5,
            use_shifts: false,
        },
    );
    check(p.row_indices() == want && p.col_indices() == want, || {
        format!(
            "evaluators agree (max diff {worst:e}) but shifted partition gives rows {:?} cols {:?}; \
             column similarities [{}] keep column 5 with 6 (4 of 7 entries one row apart). \
             Without shifts: rows {:?} cols {:?}",
            p.row_indices(),
            p.col_indices(),
            sims[1].join(", "),
            plain.row_indices(),
            plain.col_indices()
        )
    })?;
    Ok(format!("rows/cols {want:?}, max similarity diff {worst:e}"))
}

fn oracle_fuzz() -> Outcome {
    let mut products = 0;
    let mut dense_blocks = 0;
    let mut sparse_blocks = 0;
    for seed in 0..200u64 {
        let (a, v, c) = common::random_staged(seed, 512, ValueDomain::SmallInteger);
        dense_blocks += c.num_dense_blocks();
        sparse_blocks += c.ublocks.len();
        for trial in 0..3 {
            let x = trial_vector(a.num_cols(), ValueDomain::SmallInteger, seed, trial);
            let y = a.spmv(&x).map_err(|e| e.to_string())?;
            let yv = spmv_vbr_interpret(&v, &x).map_err(|e| e.to_string())?;
            let yc = spmv_vbrc_interpret(&c, &x).map_err(|e| e.to_string())?;
            for (name, other) in [("vbr", &yv), ("vbrc", &yc)] {
                if let Some(i) = (0..y.len()).find(|&i| y[i].to_bits() != other[i].to_bits()) {
                    return Err(format!(
                        "seed {seed} trial {trial}: {name} row {i} gives {} vs {}",
                        other[i], y[i]
                    ));
                }
            }
            products += 1;
        }
    }
    Ok(format!(
        "{products} products bitwise equal ({dense_blocks} dense / {sparse_blocks} sparse blocks)"
    ))
}

fn suitability_gate() -> Outcome {
    let model = DecisionModel::default();
    let n = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let entries = index::sample(&mut rng, n * n, 5000)
        .into_iter()
        .map(|p| (p / n, p % n, 1.0 + (p % 9) as f64))
        .collect();
    let random = CsrMatrix::from_triplets(
        &TripletMatrix::from_entries(n, n, entries).map_err(|e| e.to_string())?,
    );
    let p = partition(&random, &PartitionConfig::default());
    let r = assess_matrix(&random, &p, &model).map_err(|e| e.to_string())?;
    check(!r.suitable, || {
        format!(
            "random matrix judged suitable ({} dense blocks)",
            r.dense_block_count
        )
    })?;

    let spec = SyntheticSpec {
        rows: n,
        cols: n,
        row_splits: 20,
        col_splits: 20,
        nonempty_blocks: 10,
        block_density: 1.0,
        value_domain: ValueDomain::SmallInteger,
        seed: 42,
    };
    let blocked = CsrMatrix::from_triplets(&gen_synthetic(&spec).map_err(|e| e.to_string())?);
    let p = partition(&blocked, &PartitionConfig::default());
    let s = assess_matrix(&blocked, &p, &model).map_err(|e| e.to_string())?;
    check(s.suitable && s.dense_coverage >= 0.95, || {
        format!(
            "blocked matrix: suitable {} coverage {}",
            s.suitable, s.dense_coverage
        )
    })?;
    Ok(format!(
        "random: {} blocks, 0 dense; blocked: {} dense blocks, coverage {:.3}",
        r.decisions.len(),
        s.dense_block_count,
        s.dense_coverage
    ))
}

fn serialization() -> Outcome {
    for seed in 0..1000u64 {
        let domain = if seed % 2 == 0 {
            ValueDomain::Real
        } else {
            ValueDomain::SmallInteger
        };
        let (_, _, c) = common::random_staged(seed, 64, domain);
        let bytes = serialize_vbrc(&c).map_err(|e| format!("seed {seed}: {e}"))?;
        let back = deserialize_vbrc(&bytes).map_err(|e| format!("seed {seed}: {e}"))?;
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        check(
            back == c && bits(&back.val) == bits(&c.val) && bits(&back.csr_val) == bits(&c.csr_val),
            || format!("seed {seed}: round trip differs"),
        )?;
    }
    Ok("1000 matrices round-trip exactly".into())
}

fn kernel_soundness() -> Outcome {
    let Some(tc) = common::toolchain_or_skip() else {
        return Err("no C compiler available".into());
    };
    for seed in 0..50u64 {
        let (a, _, c) = common::random_staged(1000 + seed, 256, ValueDomain::SmallInteger);
        let plan = build_plan(&c).map_err(|e| e.to_string())?;
        let x = trial_vector(a.num_cols(), ValueDomain::SmallInteger, seed, 0);
        let reference = a.spmv(&x).map_err(|e| e.to_string())?;
        for threads in [1, 2, 4] {
            let src = emit_kernel(
                &plan,
                &EmitOptions {
                    threads,
                    ..Default::default()
                },
            )
            .map_err(|e| e.to_string())?;
            let kernel = tc.compile(&src).map_err(|e| e.to_string())?;
            let run = kernel
                .run(&c, &x, threads, 1)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let same = run
                .y
                .iter()
                .zip(&reference)
                .all(|(a, b)| a.to_bits() == b.to_bits());
            check(same, || {
                format!("seed {seed} threads {threads}: output differs")
            })?;
        }
    }
    Ok("50 matrices x {1,2,4} threads bitwise equal to the reference".into())
}

fn literal_bounds(src: &str) -> bool {
    src.lines()
        .map(str::trim)
        .filter(|l| l.starts_with("for (long"))
        .all(|l| {
            // for (long j = A; j < B; j++)
            let nums: Vec<&str> = l.split(['=', '<', ';']).map(str::trim).collect();
            nums.len() >= 4 && nums[1].parse::<u64>().is_ok() && nums[3].parse::<u64>().is_ok()
        })
}

fn staging_guarantee() -> Outcome {
    let listing = DenseLoop {
        block_ordinal: 0,
        block_row: 0,
        row_start: 640,
        row_end: 690,
        col_start: 4175,
        col_end: 4200,
        val_offset: 69722,
    };
    let plan = KernelPlan {
        num_rows: 690,
        num_cols: 4200,
        val_len: 69722 + 1250,
        remainder_nnz: 0,
        dense_loops: vec![listing],
        block_rows: vec![vbrc_core::staging::BlockRowPlan {
            row_start: 0,
            row_end: 690,
            dense: 0..1,
            remainder_nnz: 0,
        }],
        csr_dispatch: false,
    };
    let src = emit_kernel(&plan, &EmitOptions::default())
        .map_err(|e| e.to_string())?
        .source_text;
    let squeezed: String = src.split_whitespace().collect();
    check(squeezed.contains("val[69722+(j-4175)*50+(i-640)]"), || {
        "index expression missing".into()
    })?;

    let forbidden = ["rpntr", "cpntr", "bindx", "indx"];
    for seed in 0..20u64 {
        let (_, _, c) = common::random_staged(seed, 128, ValueDomain::Real);
        let src = emit_kernel(
            &build_plan(&c).map_err(|e| e.to_string())?,
            &EmitOptions::default(),
        )
        .map_err(|e| e.to_string())?
        .source_text;
        let words: BTreeSet<&str> = src
            .split(|ch: char| !ch.is_ascii_alphanumeric() && ch != '_')
            .collect();
        if let Some(w) = forbidden.iter().find(|w| words.contains(*w)) {
            return Err(format!("seed {seed}: generated source reads {w}"));
        }
        check(literal_bounds(&src), || {
            format!("seed {seed}: non-literal loop bound")
        })?;
    }
    Ok("index expression reproduced; bounds literal; no indirection arrays".into())
}

fn performance() -> Outcome {
    let Some(tc) = common::toolchain_or_skip() else {
        return Err("no C compiler available".into());
    };
    let cfg = BenchConfig {
        threads: vec![1],
        repeats: 9,
        ..Default::default()
    };
    let spec = SyntheticSpec {
        rows: 4000,
        cols: 4000,
        row_splits: 20,
        col_splits: 20,
        nonempty_blocks: 40,
        block_density: 1.0,
        value_domain: ValueDomain::SmallInteger,
        seed: 7,
    };
    let a = CsrMatrix::from_triplets(&gen_synthetic(&spec).map_err(|e| e.to_string())?);
    let (rows, cols) = spec.grid_cuts();
    let v = csr_to_vbr(&a, &Partition::new(rows, cols).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let staged = vbr_to_vbrc(&v, |_| Storage::Dense).map_err(|e| e.to_string())?;
    let records =
        bench_matrix("blocked-4000", &a, &staged, &tc, &cfg).map_err(|e| e.to_string())?;
    let speedup = records
        .iter()
        .find(|r| r.path == PATH_STAGED)
        .map(|r| r.speedup)
        .unwrap_or(0.0);

    let densities = [1.0, 0.8, 0.6, 0.4, 0.2];
    let sweep = density_sweep(4000, 20, 40, &densities, &tc, &cfg).map_err(|e| e.to_string())?;
    let series: Vec<f64> = sweep
        .iter()
        .map(|p| {
            p.records
                .iter()
                .find(|r| r.path == PATH_STAGED)
                .map(|r| r.speedup)
                .unwrap_or(0.0)
        })
        .collect();
    let shown: Vec<String> = series.iter().map(|s| format!("{s:.2}")).collect();
    check(speedup >= 1.0, || {
        format!("full-density speedup {speedup:.3} < 1")
    })?;
    let monotone = series.windows(2).all(|w| w[1] <= w[0] * 1.10);
    check(monotone, || {
        format!(
            "sweep {densities:?} -> [{}] rises by more than 10%",
            shown.join(", ")
        )
    })?;
    Ok(format!(
        "speedup {speedup:.2}; sweep {densities:?} -> [{}]",
        shown.join(", ")
    ))
}

fn main() -> ExitCode {
    let mut r = Runner { failed: Vec::new() };
    let s = Duration::from_secs;
    r.run("PRIMARY", "worked example VBR arrays", s(1), example_vbr);
    r.run(
        "PRIMARY",
        "worked example VBR-C split at density 0.5",
        s(1),
        example_vbrc,
    );
    r.run(
        "PRIMARY",
        "partitioner fidelity",
        s(1),
        partitioner_fidelity,
    );
    r.run("PRIMARY", "oracle equivalence fuzz", s(120), oracle_fuzz);
    r.run("PRIMARY", "suitability gate", s(30), suitability_gate);
    r.run("PRIMARY", "serialization round trip", s(60), serialization);
    r.run(
        "SECONDARY",
        "staged kernel soundness",
        s(300),
        kernel_soundness,
    );
    r.run("SECONDARY", "staging guarantee", s(1), staging_guarantee);
    r.run("SECONDARY", "performance property", s(600), performance);
    if r.failed.is_empty() {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} failed: {}", r.failed.len(), r.failed.join("; "));
        ExitCode::FAILURE
    }
}
