use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::{execute_plan, spmv_vbr_interpret, spmv_vbrc_interpret};
use crate::formats::{VbrCMatrix, VbrMatrix};
use crate::matrix::synthetic::rng_for;
use crate::matrix::{CsrMatrix, ValueDomain};
use crate::par;
use crate::staging::{build_plan, KernelPlan};

/// Relative tolerance for real-valued comparisons.
pub const REAL_RTOL: f64 = 1e-12;

/// Anything that computes `y = A x` for a fixed matrix. Trials may run
/// concurrently, hence `Sync`.
pub trait SpmvPath: Sync {
    fn name(&self) -> String;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

pub struct CsrPath<'a>(pub &'a CsrMatrix);

impl SpmvPath for CsrPath<'_> {
    fn name(&self) -> String {
        "csr-reference".into()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.spmv(x)
    }
}

pub struct VbrPath<'a>(pub &'a VbrMatrix);

impl SpmvPath for VbrPath<'_> {
    fn name(&self) -> String {
        "vbr-interpret".into()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        spmv_vbr_interpret(self.0, x)
    }
}

pub struct VbrcPath<'a>(pub &'a VbrCMatrix);

impl SpmvPath for VbrcPath<'_> {
    fn name(&self) -> String {
        "vbrc-interpret".into()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        spmv_vbrc_interpret(self.0, x)
    }
}

/// The staged plan executed in-process.
pub struct NativePlanPath<'a> {
    plan: KernelPlan,
    matrix: &'a VbrCMatrix,
}

impl<'a> NativePlanPath<'a> {
    pub fn new(matrix: &'a VbrCMatrix) -> Result<Self> {
        Ok(NativePlanPath {
            plan: build_plan(matrix)?,
            matrix,
        })
    }
}

impl SpmvPath for NativePlanPath<'_> {
    fn name(&self) -> String {
        "staged-native".into()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        execute_plan(&self.plan, self.matrix, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub trial: usize,
    pub path: String,
    pub row: usize,
    pub expected: f64,
    pub actual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub paths: Vec<String>,
    pub trials: usize,
    /// Number of (trial, path) products compared against the first path.
    pub comparisons: usize,
    pub divergent_products: usize,
    pub first_divergence: Option<Divergence>,
    /// Paths that failed to produce a result: `(path, trial, message)`.
    pub errors: Vec<(String, usize, String)>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.divergent_products == 0 && self.errors.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "paths: {}", self.paths.join(", "))?;
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "comparisons: {}", self.comparisons)?;
        writeln!(f, "divergent_products: {}", self.divergent_products)?;
        if let Some(d) = &self.first_divergence {
            writeln!(
                f,
                "first_divergence: trial {} path {} row {} expected {:e} actual {:e}",
                d.trial, d.path, d.row, d.expected, d.actual
            )?;
        }
        for (path, trial, msg) in &self.errors {
            writeln!(f, "error: trial {trial} path {path}: {msg}")?;
        }
        Ok(())
    }
}

/// Random input vector for one trial.
pub fn trial_vector(n: usize, domain: ValueDomain, seed: u64, trial: usize) -> Vec<f64> {
    let mut rng = rng_for(seed, 0x7a11 + trial as u64);
    (0..n)
        .map(|_| match domain {
            ValueDomain::SmallInteger => rng.gen_range(-8i32..=8) as f64,
            ValueDomain::Real => rng.gen_range(-1.0..1.0),
        })
        .collect()
}

/// `sum_j |A[i,j] * x[j]|` per row; the scale for real-domain tolerances.
fn row_scales(m: &CsrMatrix, x: &[f64]) -> Vec<f64> {
    (0..m.num_rows())
        .map(|i| {
            let (cols, vals) = m.row(i);
            cols.iter().zip(vals).map(|(&j, v)| (v * x[j]).abs()).sum()
        })
        .collect()
}

fn agrees(domain: ValueDomain, expected: f64, actual: f64, scale: f64) -> bool {
    match domain {
        ValueDomain::SmallInteger => expected.to_bits() == actual.to_bits(),
        ValueDomain::Real => {
            expected == actual
                || (expected - actual).abs()
                    <= REAL_RTOL * expected.abs().max(actual.abs()).max(scale)
        }
    }
}

#[derive(Default)]
struct TrialOutcome {
    comparisons: usize,
    divergences: Vec<Divergence>,
    errors: Vec<(String, usize, String)>,
}

fn run_trial(
    source: &CsrMatrix,
    paths: &[&dyn SpmvPath],
    domain: ValueDomain,
    seed: u64,
    trial: usize,
) -> TrialOutcome {
    let mut out = TrialOutcome::default();
    let x = trial_vector(source.num_cols(), domain, seed, trial);
    let scales = row_scales(source, &x);
    let reference = match paths[0].apply(&x) {
        Ok(y) => y,
        Err(e) => {
            out.errors.push((paths[0].name(), trial, e.to_string()));
            return out;
        }
    };
    for path in &paths[1..] {
        out.comparisons += 1;
        let y = match path.apply(&x) {
            Ok(y) => y,
            Err(e) => {
                out.errors.push((path.name(), trial, e.to_string()));
                continue;
            }
        };
        if y.len() != reference.len() {
            out.errors.push((
                path.name(),
                trial,
                format!("produced {} rows, expected {}", y.len(), reference.len()),
            ));
            continue;
        }
        if let Some(row) = (0..y.len()).find(|&i| !agrees(domain, reference[i], y[i], scales[i])) {
            out.divergences.push(Divergence {
                trial,
                path: path.name(),
                row,
                expected: reference[row],
                actual: y[row],
            });
        }
    }
    out
}

/// Runs every path on `trials` seeded random vectors and compares each
/// result with the first path's. The integer domain demands bitwise
/// equality; the real domain allows a relative error of [`REAL_RTOL`]
/// measured against the row's absolute term sum. Trials run in parallel;
/// the report is assembled in trial order.
pub fn verify_equivalence(
    source: &CsrMatrix,
    paths: &[&dyn SpmvPath],
    trials: usize,
    domain: ValueDomain,
    seed: u64,
) -> Result<VerifyReport> {
    if paths.len() < 2 {
        return Err(Error::InvalidArgument(
            "equivalence needs at least two execution paths".into(),
        ));
    }
    let mut report = VerifyReport {
        paths: paths.iter().map(|p| p.name()).collect(),
        trials,
        ..Default::default()
    };
    let outcomes = par::map_range(trials, |trial| {
        run_trial(source, paths, domain, seed, trial)
    });
    for o in outcomes {
        report.comparisons += o.comparisons;
        report.divergent_products += o.divergences.len();
        if report.first_divergence.is_none() {
            report.first_divergence = o.divergences.into_iter().next();
        }
        report.errors.extend(o.errors);
    }
    Ok(report)
}
