use std::fs;
use std::io;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;

use vbrc_core::bench::{bench_matrix, density_sweep, BenchConfig, BenchRecord};
use vbrc_core::classify::{assess_matrix, DecisionModel, SuitabilityReport};
use vbrc_core::exec::verify::VerifyReport;
use vbrc_core::exec::{verify_equivalence, CsrPath, NativePlanPath, SpmvPath, VbrPath, VbrcPath};
use vbrc_core::formats::{csr_to_vbr, serialize_vbrc, VbrCMatrix, VbrMatrix};
use vbrc_core::matrix::mtx::write_matrix_market;
use vbrc_core::matrix::{self, CsrMatrix, SyntheticSpec, ValueDomain};
use vbrc_core::partition::Partition;
use vbrc_core::staging::{
    binfmt, build_plan, emit_kernel, CompiledKernel, CompiledKernelPath, GeneratedSource,
};

use crate::args::*;
use crate::input::{self, Input};
use crate::Status;

/// Everything up to the suitability decision.
struct Assessed {
    a: CsrMatrix,
    partition: Partition,
    model: DecisionModel,
    report: SuitabilityReport,
}

fn assess(a: CsrMatrix, part: &PartitionOpts, model: &ModelOpts, seed: u64) -> Result<Assessed> {
    let partition = input::build_partition(&a, part)?;
    let model = input::build_model(model, seed)?;
    let report = assess_matrix(&a, &partition, &model).context("classify")?;
    Ok(Assessed {
        a,
        partition,
        model,
        report,
    })
}

fn to_vbrc(s: &Assessed) -> Result<(VbrMatrix, VbrCMatrix)> {
    let v = csr_to_vbr(&s.a, &s.partition).context("vbr")?;
    let c = s.model.split(&v).context("vbrc")?;
    Ok((v, c))
}

fn emit(c: &VbrCMatrix, kernel: &KernelOpts, threads: usize) -> Result<GeneratedSource> {
    let plan = build_plan(c).context("plan")?;
    emit_kernel(&plan, &input::emit_options(kernel, threads)).context("emit")
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("write: {}", path.display()))
}

/// Writes the stored matrix, the kernel source and the kernel's data files.
fn write_stage_artifacts(dir: &Path, c: &VbrCMatrix, src: &GeneratedSource) -> Result<()> {
    write_file(
        &dir.join("matrix.vbrc"),
        serialize_vbrc(c).context("serialize")?,
    )?;
    write_file(&dir.join("kernel.c"), &src.source_text)?;
    write_file(&dir.join("val.bin"), binfmt::encode_vec(&c.val))?;
    write_file(&dir.join("csr.bin"), binfmt::encode_remainder(c))?;
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("write: cannot create {}", dir.display()))
}

pub fn partition(args: PartitionArgs) -> Result<Status> {
    let a = input::load_mtx(&args.matrix)?;
    let p = input::build_partition(&a, &args.part)?;
    input::write_output(args.out.as_deref(), &p.to_string())?;
    Ok(Status::Ok)
}

pub fn classify(args: ClassifyArgs) -> Result<Status> {
    let a = input::load_mtx(&args.matrix)?;
    let s = assess(a, &args.part, &args.model, args.seed)?;
    input::write_output(args.out.as_deref(), &s.report.to_string())?;
    Ok(if s.report.suitable {
        Status::Ok
    } else {
        Status::Unsuitable
    })
}

pub fn codegen(args: CodegenArgs) -> Result<Status> {
    let c = match input::load(&args.matrix)? {
        Input::Vbrc(c) => c,
        Input::Csr(a) => {
            let s = assess(a, &args.part, &args.model, args.seed)?;
            if !s.report.suitable {
                eprintln!("classify: no dense blocks; nothing to stage");
                return Ok(Status::Unsuitable);
            }
            to_vbrc(&s)?.1
        }
    };
    let src = emit(&c, &args.kernel, args.threads)?;
    create_dir(&args.out)?;
    write_stage_artifacts(&args.out, &c, &src)?;
    println!("digest={}", src.digest);
    Ok(Status::Ok)
}

pub fn run(args: RunArgs) -> Result<Status> {
    let c = match input::load(&args.matrix)? {
        Input::Vbrc(c) => c,
        Input::Csr(_) => bail!("read: {} is not a VBR-C file", args.matrix.display()),
    };
    let x = match &args.x {
        Some(p) => binfmt::read_vec(p).with_context(|| format!("read: {}", p.display()))?,
        None => vec![1.0; c.num_cols],
    };
    let kernel = CompiledKernel::from_path(&args.kernel);
    let result = kernel
        .run(&c, &x, args.threads, args.repeats)
        .context("run")?;
    if let Some(out) = &args.out {
        binfmt::write_vec(out, &result.y).with_context(|| format!("write: {}", out.display()))?;
    }
    println!("median_ns={}", result.median_ns);
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    matrix: &'a str,
    path: &'a str,
    threads: usize,
    repeats: usize,
    median_ns: u64,
    speedup: f64,
}

fn write_csv<W: io::Write>(out: W, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow {
            matrix: &r.matrix,
            path: &r.path,
            threads: r.threads,
            repeats: r.repeats,
            median_ns: r.median_ns,
            speedup: r.speedup,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn bench(args: BenchArgs) -> Result<Status> {
    ensure!(
        !args.matrices.is_empty() || !args.sweep.is_empty(),
        "bench: give matrix files, --sweep densities, or both"
    );
    let tc = input::toolchain(&args.kernel);
    let cfg = BenchConfig {
        threads: args.threads.clone(),
        repeats: args.repeats,
        emit: input::emit_options(&args.kernel, 1),
        seed: args.seed,
    };
    let mut records = Vec::new();
    for path in &args.matrices {
        let a = input::load_mtx(path)?;
        let s = assess(a, &args.part, &args.model, args.seed)?;
        let (_, c) = to_vbrc(&s)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        records.extend(
            bench_matrix(&name, &s.a, &c, &tc, &cfg)
                .with_context(|| format!("bench: {}", path.display()))?,
        );
    }
    if !args.sweep.is_empty() {
        let sweep = density_sweep(
            args.sweep_size,
            args.sweep_splits,
            args.sweep_blocks,
            &args.sweep,
            &tc,
            &cfg,
        )
        .context("bench: density sweep")?;
        records.extend(sweep.into_iter().flat_map(|p| p.records));
    }
    match &args.out {
        Some(p) => {
            let f = fs::File::create(p).with_context(|| format!("write: {}", p.display()))?;
            write_csv(f, &records)?;
        }
        None => write_csv(io::stdout().lock(), &records)?,
    }
    Ok(Status::Ok)
}

fn domain_for(arg: DomainArg, values: &[f64]) -> ValueDomain {
    match arg {
        DomainArg::Int => ValueDomain::SmallInteger,
        DomainArg::Real => ValueDomain::Real,
        DomainArg::Auto if values.iter().all(|v| v.fract() == 0.0 && v.abs() < 1e6) => {
            ValueDomain::SmallInteger
        }
        DomainArg::Auto => ValueDomain::Real,
    }
}

pub fn verify(args: VerifyArgs) -> Result<Status> {
    let (a, v, c) = match input::load(&args.matrix)? {
        Input::Vbrc(c) => (c.to_csr().context("read")?, None, c),
        Input::Csr(a) => {
            let s = assess(a, &args.part, &args.model, args.seed)?;
            let (v, c) = to_vbrc(&s)?;
            (s.a, Some(v), c)
        }
    };
    let domain = domain_for(args.domain, a.values());
    let native = NativePlanPath::new(&c).context("plan")?;
    let kernel = if args.no_compile {
        None
    } else {
        let src = emit(&c, &args.kernel, args.threads)?;
        Some(
            input::toolchain(&args.kernel)
                .compile(&src)
                .context("compile")?,
        )
    };
    let compiled = kernel.as_ref().map(|k| CompiledKernelPath {
        kernel: k,
        matrix: &c,
        threads: args.threads,
    });

    let csr = CsrPath(&a);
    let vbr = v.as_ref().map(VbrPath);
    let vbrc = VbrcPath(&c);
    let mut paths: Vec<&dyn SpmvPath> = vec![&csr];
    if let Some(p) = &vbr {
        paths.push(p);
    }
    paths.push(&vbrc);
    paths.push(&native);
    if let Some(p) = &compiled {
        paths.push(p);
    }
    let report: VerifyReport =
        verify_equivalence(&a, &paths, args.trials, domain, args.seed).context("verify")?;
    print!("{report}");
    Ok(if report.is_clean() {
        Status::Ok
    } else {
        Status::Failed
    })
}

pub fn gen_synthetic(args: GenArgs) -> Result<Status> {
    let spec = SyntheticSpec {
        rows: args.rows,
        cols: args.cols,
        row_splits: args.row_splits,
        col_splits: args.col_splits,
        nonempty_blocks: args.blocks,
        block_density: args.density,
        value_domain: match args.values {
            ValueArg::Int => ValueDomain::SmallInteger,
            ValueArg::Real => ValueDomain::Real,
        },
        seed: args.seed,
    };
    let t = matrix::gen_synthetic(&spec).context("gen-synthetic")?;
    let mut buf = Vec::new();
    write_matrix_market(&t, &mut buf).context("gen-synthetic")?;
    match &args.out {
        Some(p) => write_file(p, buf)?,
        None => io::Write::write_all(&mut io::stdout().lock(), &buf)?,
    }
    Ok(Status::Ok)
}

pub fn pipeline(args: PipelineArgs) -> Result<Status> {
    let a = input::load_mtx(&args.matrix)?;
    let s = assess(a, &args.part, &args.model, args.seed)?;
    create_dir(&args.out)?;
    write_file(&args.out.join("partition.txt"), s.partition.to_string())?;
    write_file(&args.out.join("report.txt"), s.report.to_string())?;
    println!(
        "suitable={} blocks={} dense_blocks={} dense_coverage={:.4}",
        s.report.suitable,
        s.report.decisions.len(),
        s.report.dense_block_count,
        s.report.dense_coverage
    );
    if !s.report.suitable {
        return Ok(Status::Unsuitable);
    }
    let (_, c) = to_vbrc(&s)?;
    let src = emit(&c, &args.kernel, args.threads)?;
    write_stage_artifacts(&args.out, &c, &src)?;
    let exe = input::toolchain(&args.kernel)
        .compile_into(&src, &args.out)
        .context("compile")?;
    println!("kernel={}", exe.display());
    Ok(Status::Ok)
}
