use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("entry ({row}, {col}) outside declared {num_rows}x{num_cols} bounds")]
    Bounds {
        row: usize,
        col: usize,
        num_rows: usize,
        num_cols: usize,
    },

    #[error("unsupported matrix market variant: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    Dim(String),

    #[error("infeasible synthetic spec: {0}")]
    Spec(String),

    #[error("invalid storage format: {0}")]
    Format(String),

    #[error("serialization error: {0}")]
    Ser(String),

    #[error("decision model error: {0}")]
    Model(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("toolchain unavailable: {0}")]
    Toolchain(String),

    #[error("kernel compilation failed:\n{diagnostics}")]
    Compile { diagnostics: String },

    #[error("kernel run failed: {0}")]
    Run(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("template error: {0}")]
    Template(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dim(msg.into())
    }
}
