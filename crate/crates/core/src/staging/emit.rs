use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::plan::{DenseLoop, KernelPlan};
use super::template::{shim_fill, Fragments};
use crate::error::Result;

/// Knobs for source emission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOptions {
    /// Number of chunks in the emitted chunk table.
    pub threads: usize,
    /// Emit blocks with at most `small_block_limit` entries as straight-line
    /// statements instead of loop nests.
    pub unroll_small_blocks: bool,
    pub small_block_limit: usize,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            threads: 1,
            unroll_small_blocks: true,
            small_block_limit: 4,
        }
    }
}

/// A complete, compilable C translation unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedSource {
    pub source_text: String,
    pub entry_symbol: String,
    pub compile_flags: Vec<String>,
    /// Hex SHA-256 of `source_text`.
    pub digest: String,
    pub num_block_rows: usize,
    pub num_chunks: usize,
}

pub const ENTRY_SYMBOL: &str = "vbrc_spmv";

/// The index expression used for entry `(i, j)` of a dense loop.
pub fn dense_index_expr(l: &DenseLoop) -> String {
    format!(
        "{}+(j-{})*{}+(i-{})",
        l.val_offset,
        l.col_start,
        l.rows(),
        l.row_start
    )
}

fn emit_dense_loop(out: &mut String, l: &DenseLoop, opts: &EmitOptions) {
    if opts.unroll_small_blocks && l.area() <= opts.small_block_limit {
        let _ = writeln!(
            out,
            "    /* block {} rows {}..{} cols {}..{} */",
            l.block_ordinal, l.row_start, l.row_end, l.col_start, l.col_end
        );
        for j in l.col_start..l.col_end {
            for i in l.row_start..l.row_end {
                let k = l.val_offset + (j - l.col_start) * l.rows() + (i - l.row_start);
                let _ = writeln!(out, "    y[{i}] += val[{k}] * x[{j}];");
            }
        }
        return;
    }
    let _ = writeln!(
        out,
        "    /* block {} */\n    for (long j = {}; j < {}; j++) {{\n        for (long i = {}; i < {}; i++) {{\n            y[i] += val[{}] * x[j];\n        }}\n    }}",
        l.block_ordinal,
        l.col_start,
        l.col_end,
        l.row_start,
        l.row_end,
        dense_index_expr(l)
    );
}

fn dense_nests(plan: &KernelPlan, opts: &EmitOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#define VBRC_NUM_BLOCK_ROWS {}", plan.block_rows.len());
    if plan.block_rows.is_empty() {
        return out;
    }
    for (b, br) in plan.block_rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "\nstatic void vbrc_block_row_{b}(const double *restrict val, const double *restrict x, double *restrict y)\n{{"
        );
        let _ = writeln!(
            out,
            "    for (long i = {}; i < {}; i++) y[i] = 0.0;",
            br.row_start, br.row_end
        );
        for l in plan.dense_loops_of(b) {
            emit_dense_loop(&mut out, l, opts);
        }
        if br.remainder_nnz > 0 {
            let _ = writeln!(
                out,
                "    csr_remainder({}, {}, x, y);",
                br.row_start, br.row_end
            );
        }
        let _ = writeln!(out, "}}");
    }
    let _ = writeln!(out, "\n#define VBRC_HAVE_BLOCK_ROWS 1");
    let _ = writeln!(out, "static void (*const vbrc_block_rows[VBRC_NUM_BLOCK_ROWS])(const double *restrict, const double *restrict, double *restrict) = {{");
    for b in 0..plan.block_rows.len() {
        let _ = writeln!(out, "    vbrc_block_row_{b},");
    }
    let _ = writeln!(out, "}};");
    out
}

fn remainder_bounds(plan: &KernelPlan) -> String {
    format!(
        "#define VBRC_NUM_ROWS {}UL\n#define VBRC_NUM_COLS {}UL\n#define VBRC_VAL_LEN {}UL\n#define VBRC_REMAINDER_NNZ {}UL\n",
        plan.num_rows, plan.num_cols, plan.val_len, plan.remainder_nnz
    )
}

fn chunk_table(plan: &KernelPlan, threads: usize) -> String {
    let chunks = plan.chunks(threads);
    let mut out = format!(
        "#define VBRC_NUM_CHUNKS {}\nstatic const unsigned long vbrc_chunks[VBRC_NUM_CHUNKS][2] = {{\n",
        chunks.len()
    );
    for c in &chunks {
        let _ = writeln!(out, "    {{{}, {}}},", c.start, c.end);
    }
    out.push_str("};\n");
    out
}

/// Emits the specialized kernel for `plan`. Output depends only on the plan
/// and the options, so repeated calls are byte-identical.
pub fn emit_kernel(plan: &KernelPlan, opts: &EmitOptions) -> Result<GeneratedSource> {
    let fragments = Fragments {
        dense_nests: Some(dense_nests(plan, opts)),
        remainder_bounds: Some(remainder_bounds(plan)),
        chunk_table: Some(chunk_table(plan, opts.threads)),
    };
    let source_text = shim_fill(super::template::RUNTIME_TEMPLATE, &fragments)?;
    let digest = format!("{:x}", Sha256::digest(source_text.as_bytes()));
    Ok(GeneratedSource {
        source_text,
        entry_symbol: ENTRY_SYMBOL.to_string(),
        compile_flags: super::toolchain::default_flags(),
        digest,
        num_block_rows: plan.block_rows.len(),
        num_chunks: opts.threads.max(1),
    })
}
