//! `ssqw` command-line tool.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | `train --mse-gate` not met |
//! | 2 | usage error (bad or missing flags, invalid parameter values) |
//! | 3 | target unrepresentable on the requested domain |
//! | 4 | input file missing or unreadable |
//! | 5 | optimizer failure |
//! | 6 | target and trained distributions are on different grids |
//! | 7 | input file could not be parsed |
//! | 8 | output could not be written |

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

pub const OUT_DIR_ENV: &str = "SSQW_OUT_DIR";

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

pub mod exit {
    pub const GATE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const UNREPRESENTABLE: u8 = 3;
    pub const MISSING_FILE: u8 = 4;
    pub const OPTIMIZER: u8 = 5;
    pub const GRID_MISMATCH: u8 = 6;
    pub const PARSE: u8 = 7;
    pub const WRITE: u8 = 8;
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenTarget(a) => commands::gen_target(&a),
        Command::Train(a) => commands::train(&a),
        Command::Price(a) => commands::price(&a),
        Command::Ingest(a) => commands::ingest(&a),
        Command::Repro(a) => commands::repro(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
