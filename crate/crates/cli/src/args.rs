use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "vbrc", version, about = "Variable-block SpMV staging toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the row and column cuts chosen for a matrix.
    Partition(PartitionArgs),
    /// Classify every block and report whether the matrix is worth staging.
    Classify(ClassifyArgs),
    /// Emit the specialized C kernel and its data files.
    Codegen(CodegenArgs),
    /// Run a compiled kernel on a stored VBR-C matrix.
    Run(RunArgs),
    /// Time staged kernels against the compiled CSR baseline (CSV).
    Bench(BenchArgs),
    /// Check that every execution path computes the same product.
    Verify(VerifyArgs),
    /// Write a synthetic blocked matrix in Matrix Market format.
    GenSynthetic(GenArgs),
    /// Read, partition, classify, stage, emit and compile in one go.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PartitionOpts {
    /// Cut between neighbours whose pattern similarity is below this.
    #[arg(long, default_value_t = 0.5)]
    pub cut_threshold: f64,
    /// Compare patterns without the one-position shifts.
    #[arg(long)]
    pub no_shifts: bool,
    /// Use cuts from a file (as printed by `partition`) instead.
    #[arg(long, value_name = "FILE")]
    pub partition: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelOpts {
    /// Blocks must be strictly denser than this to be stored dense.
    #[arg(long, default_value_t = 0.5)]
    pub density_floor: f64,
    /// Blocks smaller than this many elements are stored sparse.
    #[arg(long, default_value_t = 64)]
    pub min_elements: usize,
    /// Speedup a table-mode model needs before choosing dense storage.
    #[arg(long, default_value_t = 1.3)]
    pub speedup_threshold: f64,
    /// Load a decision model file instead of the density heuristic.
    #[arg(long, value_name = "FILE", conflicts_with = "calibrate")]
    pub model: Option<PathBuf>,
    /// Build a table model by timing dense and CSR blocks on this machine.
    #[arg(long)]
    pub calibrate: bool,
    /// Write the model that was used to this file.
    #[arg(long, value_name = "FILE")]
    pub save_model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KernelOpts {
    /// Blocks with at most this many entries become straight-line code
    /// (0 disables unrolling).
    #[arg(long, default_value_t = 4)]
    pub unroll_limit: usize,
    /// C compiler command.
    #[arg(long, env = "VBRC_CC", default_value = "cc")]
    pub cc: String,
    /// Compiler flags, whitespace separated.
    #[arg(
        long,
        allow_hyphen_values = true,
        default_value = "-O3 -march=native -funroll-all-loops -mavx -mprefer-vector-width=512"
    )]
    pub cc_flags: String,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Matrix Market file.
    pub matrix: PathBuf,
    #[command(flatten)]
    pub part: PartitionOpts,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub matrix: PathBuf,
    #[command(flatten)]
    pub part: PartitionOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CodegenArgs {
    /// Matrix Market file or stored VBR-C matrix.
    pub matrix: PathBuf,
    #[command(flatten)]
    pub part: PartitionOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    /// Chunks in the emitted schedule and threads at run time.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub kernel: KernelOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Compiled kernel executable.
    pub kernel: PathBuf,
    /// Stored VBR-C matrix the kernel was generated for.
    pub matrix: PathBuf,
    /// Input vector in the kernel's binary format; all ones if omitted.
    #[arg(long)]
    pub x: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Where to write y (binary vector format).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Matrix Market files.
    pub matrices: Vec<PathBuf>,
    #[command(flatten)]
    pub part: PartitionOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    #[command(flatten)]
    pub kernel: KernelOpts,
    /// Thread counts to time, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub threads: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Block densities for the synthetic sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<f64>,
    #[arg(long, default_value_t = 4000)]
    pub sweep_size: usize,
    #[arg(long, default_value_t = 20)]
    pub sweep_splits: usize,
    #[arg(long, default_value_t = 40)]
    pub sweep_blocks: usize,
    /// CSV destination; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    /// Integer inputs when every matrix value is integral, else real.
    Auto,
    Int,
    Real,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Matrix Market file or stored VBR-C matrix.
    pub matrix: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = DomainArg::Auto)]
    pub domain: DomainArg,
    /// Skip the compiled kernel path.
    #[arg(long)]
    pub no_compile: bool,
    #[command(flatten)]
    pub part: PartitionOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    /// Chunks in the emitted schedule and threads at run time.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub kernel: KernelOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ValueArg {
    Int,
    Real,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long)]
    pub row_splits: usize,
    #[arg(long)]
    pub col_splits: usize,
    /// Number of populated grid cells.
    #[arg(long)]
    pub blocks: usize,
    #[arg(long, default_value_t = 1.0)]
    pub density: f64,
    #[arg(long, value_enum, default_value_t = ValueArg::Int)]
    pub values: ValueArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Matrix Market destination; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    pub matrix: PathBuf,
    #[command(flatten)]
    pub part: PartitionOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    /// Chunks in the emitted schedule and threads at run time.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub kernel: KernelOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for all artifacts.
    #[arg(long)]
    pub out: PathBuf,
}
