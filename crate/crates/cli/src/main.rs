//! `fracblow`: lemma checks, single solves, threshold scans and closed-form
//! oracles for two-term fractional initial value problems.
//!
//! Exit codes: 0 success, 1 computation or I/O failure (including a failed
//! `verify-lemmas` row), 2 invalid invocation.

mod commands;
mod config;
mod emit;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{Invalid, OracleKind, Outcome, ScanArgs, SolveArgs, VerifyArgs};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Every default in one place; `--help` shows them per flag.
pub mod defaults {
    pub const ALPHA: f64 = 0.9;
    pub const BETA: f64 = 0.45;
    pub const GAMMA: f64 = 0.0;
    pub const M: f64 = 2.0;
    pub const B: f64 = 1.0;
    pub const BERNOULLI_B: f64 = 2.0;
    pub const SOURCE_SCALE: f64 = 1.0;
    pub const C1: f64 = 1.0;
    pub const C2: f64 = 1.0;
    pub const DELTA: f64 = 1.5;
    pub const T_END: f64 = 50.0;
    pub const N: usize = 4096;
    pub const CAP: f64 = 1e8;

    pub const VERIFY_ALPHA: f64 = 0.5;
    pub const VERIFY_M: f64 = 2.0;
    pub const VERIFY_T: [f64; 3] = [1.0, 10.0, 100.0];
    pub const ABS_TOL: f64 = 1e-8;
    pub const MAX_REFINEMENTS: usize = 20;
    pub const SLOPE_TOL: f64 = 0.02;

    pub const SCAN_ALPHA: f64 = 0.9;
    pub const SCAN_BETA: f64 = 0.5;
    pub const SCAN_N: usize = 2048;
    pub const HORIZON: f64 = 50.0;
    pub const GAMMA_GRID: [f64; 9] = [-0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2];
    pub const M_GRID: [f64; 12] = [1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5, 3.75, 4.0];

    pub const ML_T: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 1.0];
}

#[derive(Parser, Debug)]
#[command(name = "fracblow", version, about = "Fractional blow-up experiments: lemma checks, solves, scans, oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Emit {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output format [default: csv for verify-lemmas and scan, json for solve and oracle]
    #[arg(long, value_enum, global = true)]
    emit: Option<Emit>,
    /// Output file [default: standard output]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat `key = value` file with flag values; flags on the command line win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the cutoff-function integral I(T) against its closed-form bound
    #[command(allow_negative_numbers = true)]
    VerifyLemmas {
        #[command(flatten)]
        args: VerifyArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Solve one problem and classify blow-up
    #[command(allow_negative_numbers = true)]
    Solve {
        #[command(flatten)]
        args: SolveArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Solve over a (γ, m) grid next to the theorem range
    #[command(allow_negative_numbers = true)]
    Scan {
        #[command(flatten)]
        args: ScanArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form reference values
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
        #[command(flatten)]
        common: Common,
    },
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush().context("cannot write standard output")
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (outcome, common, default_emit): (Outcome, Common, Emit) = match cli.command {
        Command::VerifyLemmas { args, common } => (commands::verify_lemmas(&args)?, common, Emit::Csv),
        Command::Solve { args, common } => (commands::solve_cmd(&args)?, common, Emit::Json),
        Command::Scan { args, common } => (commands::scan_cmd(&args)?, common, Emit::Csv),
        Command::Oracle { kind, common } => (commands::oracle(&kind)?, common, Emit::Json),
    };
    let report = &outcome.report;
    match common.emit.unwrap_or(default_emit) {
        Emit::Json => write_out(common.out.as_ref(), &report.to_json())?,
        Emit::Csv => {
            write_out(common.out.as_ref(), &report.table.to_csv())?;
            if !report.summary.is_empty() {
                eprintln!("{}", report.summary_json());
            }
        }
    }
    Ok(outcome.ok)
}

fn is_validation(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<Invalid>() || matches!(c.downcast_ref::<fracblow_core::Error>(), Some(fracblow_core::Error::Domain(_)))
    })
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_validation(&e) { 2 } else { 1 })
        }
    }
}
