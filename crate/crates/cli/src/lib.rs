//! `sidelobe` command-line front end.
//!
//! Exit status: 0 on success, 1 for usage, configuration or model errors,
//! 2 for I/O errors.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod eval;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{CommonArgs, EvalArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sidelobe_core::Error> for CliError {
    fn from(e: sidelobe_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "sidelobe", version, about = "Side-lobe eavesdropping simulator for 60 GHz phased-array links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Attacker PSR heatmap and area report for one configuration
    Sweep(CommonArgs),
    /// Matrix of defense settings against attack strategies
    DefenseEval(EvalArgs),
    /// One defense against one attack, with device placements
    AttackEval(EvalArgs),
    /// Aggregate sweep reports into a scenario by threshold table
    Report {
        /// Sweep `_report.json` files
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        inputs: Vec<PathBuf>,
        /// Output directory
        #[arg(long, env = "SIDELOBE_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Print the parsed-value digest of a heatmap CSV
    Digest { csv: PathBuf },
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: &Command) -> Result<(), CliError> {
    let written = match cmd {
        Command::Sweep(common) => commands::cmd_sweep(&config::resolve(common, None)?)?,
        Command::DefenseEval(e) => commands::cmd_defense_eval(&config::resolve(&e.common, Some(e))?)?,
        Command::AttackEval(e) => commands::cmd_attack_eval(&config::resolve(&e.common, Some(e))?)?,
        Command::Report { inputs, out } => commands::cmd_report(inputs, out)?,
        Command::Digest { csv } => {
            println!("{}", commands::cmd_digest(csv)?);
            Vec::new()
        }
    };
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}
