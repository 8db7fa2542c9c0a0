//! `vbrc`: partition, classify, stage, verify and benchmark sparse matrices.
//!
//! Exit status: 0 on success, 2 when a matrix is unsuitable for dense
//! blocking, 1 on any error (including failed verification).

mod args;
mod commands;
mod input;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Outcome of a command that completed without error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Unsuitable,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Partition(a) => commands::partition(a),
        Command::Classify(a) => commands::classify(a),
        Command::Codegen(a) => commands::codegen(a),
        Command::Run(a) => commands::run(a),
        Command::Bench(a) => commands::bench(a),
        Command::Verify(a) => commands::verify(a),
        Command::GenSynthetic(a) => commands::gen_synthetic(a),
        Command::Pipeline(a) => commands::pipeline(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Unsuitable) => ExitCode::from(2),
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
