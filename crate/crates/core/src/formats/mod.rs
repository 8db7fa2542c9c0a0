//! Variable block row storage and its hybrid dense/CSR extension.

mod serial;
mod vbr;
mod vbrc;

pub use serial::{deserialize_vbrc, serialize_vbrc, FORMAT_VERSION, MAGIC};
pub use vbr::{csr_to_vbr, BlockRef, VbrMatrix};
pub use vbrc::{vbr_to_vbrc, VbrCMatrix};

use std::fmt;

/// One violated storage invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub array: &'static str,
    pub position: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some(p) => write!(f, "{}[{}]: {}", self.array, p, self.message),
            None => write!(f, "{}: {}", self.array, self.message),
        }
    }
}

/// Every invariant violation found by a validation pass. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(
        &mut self,
        array: &'static str,
        position: Option<usize>,
        message: impl Into<String>,
    ) {
        self.violations.push(Violation {
            array,
            position,
            message: message.into(),
        });
    }

    pub fn mentions(&self, array: &str) -> bool {
        self.violations.iter().any(|v| v.array == array)
    }

    pub(crate) fn into_result(self) -> crate::Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(crate::Error::Format(self.to_string()))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_array<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    name: &str,
    values: &[T],
) -> fmt::Result {
    write!(f, "{name}: [")?;
    for (n, v) in values.iter().enumerate() {
        if n > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{v}")?;
    }
    writeln!(f, "]")
}
