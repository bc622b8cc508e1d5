//! `spinres`: sweeps, diagnoses and oracle validation for the extended
//! Ising / XXT chain.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 numerical error.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spinres_core::{Error, Result};

use config::{Flags, Settings};

#[derive(Debug, Parser)]
#[command(name = "spinres", version, about = "Long-range two-site quantum resources of free-fermion spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// G_r for r in [-r_max, r_max].
    Gr,
    /// One resource measure versus distance.
    Resource,
    /// Resource over a 1D or 2D parameter grid.
    Sweep,
    /// Phase label from the decay mode of the coherence profile.
    Diagnose,
    /// Winding number, optionally scanned along an axis.
    Winding,
    /// Oracle and cross-method consistency checks.
    Validate,
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SPINRES_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("SPINRES_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))
}

fn run(cli: Cli) -> Result<commands::Report> {
    init_threads()?;
    let settings = Settings::resolve(cli.flags)?;
    let report = match cli.command {
        Command::Gr => commands::gr(&settings),
        Command::Resource => commands::resource(&settings),
        Command::Sweep => commands::sweep(&settings),
        Command::Diagnose => commands::diagnose(&settings),
        Command::Winding => commands::winding(&settings),
        Command::Validate => commands::validate(&settings),
    }?;
    output::emit(&report.text, settings.output.as_deref())?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(r) if r.failed => {
            eprintln!("validation failed");
            ExitCode::from(1)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
