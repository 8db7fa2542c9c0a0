use crate::error::{Error, Result};

/// The C driver with splice markers.
pub const RUNTIME_TEMPLATE: &str = include_str!("../../runtime/kernel_runtime.c");

pub const DENSE_NESTS: &str = "/*@@DENSE_NESTS@@*/";
pub const CSR_REMAINDER_BOUNDS: &str = "/*@@CSR_REMAINDER_BOUNDS@@*/";
pub const CHUNK_TABLE: &str = "/*@@CHUNK_TABLE@@*/";

/// Text for each marker. `None` means the caller forgot a fragment; use an
/// empty string for an intentional no-op.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fragments {
    pub dense_nests: Option<String>,
    pub remainder_bounds: Option<String>,
    pub chunk_table: Option<String>,
}

impl Fragments {
    /// Empty fragments: the filled program writes `y = 0`.
    pub fn noop() -> Self {
        Fragments {
            dense_nests: Some(String::new()),
            remainder_bounds: Some(String::new()),
            chunk_table: Some(String::new()),
        }
    }
}

/// Replaces each marker in `template` with its fragment. Every marker must
/// appear exactly once.
pub fn shim_fill(template: &str, fragments: &Fragments) -> Result<String> {
    let slots = [
        (DENSE_NESTS, &fragments.dense_nests),
        (CSR_REMAINDER_BOUNDS, &fragments.remainder_bounds),
        (CHUNK_TABLE, &fragments.chunk_table),
    ];
    let mut out = template.to_string();
    for (marker, fragment) in slots {
        match template.matches(marker).count() {
            0 => return Err(Error::Template(format!("marker {marker} not found"))),
            1 => {}
            n => {
                return Err(Error::Template(format!(
                    "marker {marker} appears {n} times"
                )))
            }
        }
        let Some(text) = fragment else {
            return Err(Error::Template(format!(
                "no fragment supplied for {marker}"
            )));
        };
        if text.contains("/*@@") {
            return Err(Error::Template(format!(
                "fragment for {marker} contains a marker"
            )));
        }
        out = out.replacen(marker, text, 1);
    }
    Ok(out)
}
