//! Command-line front end for the `qeq` equalizer toolkit.
//!
//! Exit status: 0 on success, 2 when a design is infeasible or a report fails
//! verification, 1 on usage and domain errors.

pub mod args;
pub mod commands;
pub mod config;

use std::ffi::OsString;

use clap::Parser;
use qeq_core::QeqError;

pub use commands::{emit_psd_csv, VerificationFailed};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

/// Parses `args` (including the program name) and runs the selected command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// Maps an error to its exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<VerificationFailed>() {
            return EXIT_INFEASIBLE;
        }
        if let Some(q) = cause.downcast_ref::<QeqError>() {
            return match q {
                QeqError::ThresholdUnsatisfied { .. } | QeqError::RealnessViolation { .. } => {
                    EXIT_INFEASIBLE
                }
                _ => EXIT_ERROR,
            };
        }
    }
    EXIT_ERROR
}
