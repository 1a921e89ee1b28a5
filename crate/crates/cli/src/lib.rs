//! The `hess2` command-line driver: inequality campaigns, solves, principle
//! and bound verification, and identity scans, each writing deterministic
//! report files into an output directory.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

use args::{Cli, Cmd, Overrides};
use clap::error::ErrorKind;
use clap::Parser;
use config::{Command, RunConfig};
use error::{exit, CliResult};
use std::ffi::OsString;
use std::path::PathBuf;

/// Loads `--config` (if any), applies the flag overrides and validates.
pub fn build_config(command: Command, file: Option<&PathBuf>, overrides: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = match file {
        Some(path) => RunConfig::parse(&commands::read_config_file(path)?, command)?,
        None => RunConfig::new(command),
    };
    for (key, value) in overrides {
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Cmd::Ineq(a) => commands::ineq(&build_config(Command::Ineq, a.common.config.as_ref(), &a.overrides())?),
        Cmd::Solve(a) => commands::solve(&build_config(Command::Solve, a.common.config.as_ref(), &a.overrides())?),
        Cmd::Verify(a) => commands::verify(&build_config(
            Command::Verify,
            a.common.config.as_ref(),
            &a.overrides(),
        )?),
        Cmd::IdentityScan(a) => commands::identity_scan_cmd(&build_config(
            Command::IdentityScan,
            a.common.config.as_ref(),
            &a.overrides(),
        )?),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::PASS,
                _ => exit::FAILURE,
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
