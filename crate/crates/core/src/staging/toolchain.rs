use std::env;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

use super::binfmt;
use super::emit::GeneratedSource;
use crate::error::{Error, Result};
use crate::exec::SpmvPath;
use crate::formats::VbrCMatrix;

/// Optimization flags kernels are built with by default.
pub const DEFAULT_FLAGS: &[&str] = &[
    "-O3",
    "-march=native",
    "-funroll-all-loops",
    "-mavx",
    "-mprefer-vector-width=512",
];

pub fn default_flags() -> Vec<String> {
    DEFAULT_FLAGS.iter().map(|s| s.to_string()).collect()
}

/// A C compiler and its flags. `-pthread` is always added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Toolchain {
    pub cc: String,
    pub flags: Vec<String>,
}

impl Default for Toolchain {
    fn default() -> Self {
        Toolchain {
            cc: "cc".into(),
            flags: default_flags(),
        }
    }
}

impl Toolchain {
    /// Compiler from `VBRC_CC`, then `CC`, falling back to `cc`.
    pub fn from_env() -> Self {
        let cc = env::var("VBRC_CC")
            .or_else(|_| env::var("CC"))
            .ok()
            .filter(|s| !s.trim().is_empty())
            .unwrap_or_else(|| "cc".into());
        Toolchain {
            cc,
            ..Default::default()
        }
    }

    /// Whether the compiler can be started at all.
    pub fn is_available(&self) -> bool {
        Command::new(&self.cc)
            .arg("--version")
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
    }

    /// Compiles `src` into a fresh temporary directory.
    pub fn compile(&self, src: &GeneratedSource) -> Result<CompiledKernel> {
        let dir = tempfile::Builder::new().prefix("vbrc-kernel").tempdir()?;
        let exe = self.compile_into(src, dir.path())?;
        Ok(CompiledKernel {
            exe,
            _dir: Some(dir),
        })
    }

    /// Writes `kernel.c` into `dir` and builds `dir/kernel`.
    pub fn compile_into(&self, src: &GeneratedSource, dir: &Path) -> Result<PathBuf> {
        let c_path = dir.join("kernel.c");
        let exe = dir.join("kernel");
        fs::write(&c_path, &src.source_text)?;
        let output = Command::new(&self.cc)
            .args(&self.flags)
            .arg("-pthread")
            .arg("-o")
            .arg(&exe)
            .arg(&c_path)
            .output()
            .map_err(|e| match e.kind() {
                ErrorKind::NotFound | ErrorKind::PermissionDenied => {
                    Error::Toolchain(format!("cannot run `{}`: {e}", self.cc))
                }
                _ => Error::Io(e),
            })?;
        if !output.status.success() {
            return Err(Error::Compile {
                diagnostics: String::from_utf8_lossy(&output.stderr).into_owned(),
            });
        }
        Ok(exe)
    }
}

/// Result of one kernel invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRun {
    pub y: Vec<f64>,
    pub median_ns: u64,
}

/// A built kernel executable. Owns its temporary directory when created by
/// [`Toolchain::compile`].
#[derive(Debug)]
pub struct CompiledKernel {
    exe: PathBuf,
    _dir: Option<TempDir>,
}

impl CompiledKernel {
    pub fn from_path(exe: impl Into<PathBuf>) -> Self {
        CompiledKernel {
            exe: exe.into(),
            _dir: None,
        }
    }

    pub fn path(&self) -> &Path {
        &self.exe
    }

    /// Runs on files already laid out in the kernel's binary formats and
    /// returns the reported median in nanoseconds.
    pub fn run_files(
        &self,
        val: &Path,
        csr: &Path,
        x: &Path,
        y: &Path,
        threads: usize,
        repeats: usize,
    ) -> Result<u64> {
        let output = Command::new(&self.exe)
            .arg(val)
            .arg(csr)
            .arg(x)
            .arg(y)
            .arg(threads.to_string())
            .arg(repeats.to_string())
            .output()
            .map_err(|e| Error::Run(format!("cannot start {}: {e}", self.exe.display())))?;
        let stderr = String::from_utf8_lossy(&output.stderr);
        match output.status.code() {
            Some(0) => {}
            Some(2) => return Err(Error::Dim(stderr.trim().to_string())),
            code => {
                return Err(Error::Run(format!(
                    "kernel exited with {code:?}: {}",
                    stderr.trim()
                )))
            }
        }
        parse_median(&String::from_utf8_lossy(&output.stdout))
    }

    /// Runs `y = A x` for the matrix the kernel was generated from.
    pub fn run(
        &self,
        m: &VbrCMatrix,
        x: &[f64],
        threads: usize,
        repeats: usize,
    ) -> Result<KernelRun> {
        let dir = tempfile::Builder::new().prefix("vbrc-run").tempdir()?;
        let p = |name: &str| dir.path().join(name);
        binfmt::write_vec(&p("val.bin"), &m.val)?;
        fs::write(p("csr.bin"), binfmt::encode_remainder(m))?;
        binfmt::write_vec(&p("x.bin"), x)?;
        let median_ns = self.run_files(
            &p("val.bin"),
            &p("csr.bin"),
            &p("x.bin"),
            &p("y.bin"),
            threads,
            repeats,
        )?;
        let y = binfmt::read_vec(&p("y.bin"))?;
        if y.len() != m.num_rows {
            return Err(Error::Run(format!(
                "kernel wrote {} rows, expected {}",
                y.len(),
                m.num_rows
            )));
        }
        Ok(KernelRun { y, median_ns })
    }
}

/// Parses the kernel's single stdout line, `median_ns=<digits>`.
pub fn parse_median(stdout: &str) -> Result<u64> {
    stdout
        .strip_prefix("median_ns=")
        .and_then(|s| s.strip_suffix('\n'))
        .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| Error::Run(format!("unexpected kernel output {stdout:?}")))
}

/// A compiled kernel as an execution path for equivalence checks.
pub struct CompiledKernelPath<'a> {
    pub kernel: &'a CompiledKernel,
    pub matrix: &'a VbrCMatrix,
    pub threads: usize,
}

impl SpmvPath for CompiledKernelPath<'_> {
    fn name(&self) -> String {
        format!("compiled-t{}", self.threads)
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.kernel.run(self.matrix, x, self.threads, 1)?.y)
    }
}
