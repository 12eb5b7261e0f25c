//! Command-line front end for `fockchan-core`.
//!
//! Every artifact is deterministic: identical arguments, configuration and
//! seed give byte-identical output. Numbers carry 12 significant digits.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors, 2 for
//! numerical failures (non-convergence, vanishing success probability).

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

pub use args::{Cli, Command};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

/// Exit status for an error raised by [`run`].
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<fockchan_core::Error>())
        .any(fockchan_core::Error::is_numerical);
    if numerical {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Writes `text` to `path`, or to standard output when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Choi(a) => emit(&commands::cmd_choi(a)?, a.out.as_deref()),
        Command::Sweep(a) => emit(&commands::cmd_sweep(a)?, a.out.as_deref()),
        Command::Optimize(a) => emit(&commands::cmd_optimize(a)?, a.out.as_deref()),
        Command::Tomo(a) => {
            let run = commands::resolve_tomo(a)?;
            let outcome = commands::cmd_tomo(&run)?;
            emit(&outcome.text, a.out.as_deref())?;
            let rec = &outcome.reconstruction;
            if !rec.converged {
                return Err(fockchan_core::Error::NonConvergence {
                    iterations: rec.iterations,
                    last_update: rec.last_update,
                })
                .context("reconstruction did not converge; the report holds the last iterate");
            }
            Ok(())
        }
    }
}
