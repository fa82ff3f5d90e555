//! `cyclab`: evaluate, fuzz, and probe the cyclic power-sum inequality from
//! the command line.
//!
//! Exit codes: 0 when every check holds, 1 when a violation is confirmed
//! (or a bracket cannot be formed), 2 for usage and domain errors.

pub mod commands;
pub mod parse;
pub mod report;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cyclab_core::numerics::Precision;
use serde::Serialize;

use report::{Entry, ErrorEntry, RunReport, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cyclab",
    version,
    about = "Numerical laboratory for a cyclic power-sum inequality"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `fast` escalates doubtful margins; `extended` evaluates everything in
    /// double-double.
    #[arg(long, global = true, value_enum, default_value_t = PrecisionArg::Fast)]
    pub precision: PrecisionArg,
    /// Write the JSON report to this path (`-` for stdout).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub json: Option<PathBuf>,
    /// Evaluate outside the stated hypotheses.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionArg {
    Fast,
    Extended,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Precision {
        match p {
            PrecisionArg::Fast => Precision::Fast,
            PrecisionArg::Extended => Precision::Extended,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the cyclic sum and its terms at one point.
    Eval(commands::EvalArgs),
    /// Fuzz a predicate (or the whole proof chain) over random feasible points.
    Verify(commands::VerifyArgs),
    /// Reproduce one of the parametric families.
    Family(commands::FamilyArgs),
    /// Bracket an open threshold exponent by bisection.
    Bisect(commands::BisectArgs),
    /// Minimum observed margins over an (n, alpha) grid, written as CSV.
    Sweep(commands::SweepArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Verify(_) => "verify",
            Command::Family(_) => "family",
            Command::Bisect(_) => "bisect",
            Command::Sweep(_) => "sweep",
        }
    }
}

/// Output of a command before it is wrapped into a [`RunReport`].
pub struct Outcome {
    pub config: serde_json::Value,
    pub results: Vec<Entry>,
    pub lines: Vec<String>,
    pub exit_code: i32,
}

pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    use cyclab_core::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::BracketInvalid(_)) | Some(E::BudgetExhausted(_)) => EXIT_VIOLATION,
        _ => EXIT_USAGE,
    }
}

/// Parses `args`, runs the command, writes the report, and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let started = Instant::now();
    let name = cli.command.name();
    let outcome = commands::dispatch(&cli.command, &cli.global);
    let (config, results, lines, exit_code) = match outcome {
        Ok(o) => (o.config, o.results, o.lines, o.exit_code),
        Err(e) => {
            let code = exit_code_for(&e);
            eprintln!("error: {e:#}");
            let detail = match e.downcast_ref::<cyclab_core::Error>() {
                Some(cyclab_core::Error::BudgetExhausted(best)) => Some(best.clone()),
                _ => None,
            };
            (
                serde_json::Value::Null,
                vec![Entry::Error(ErrorEntry {
                    message: format!("{e:#}"),
                    detail,
                })],
                Vec::new(),
                code,
            )
        }
    };
    let report = RunReport {
        schema: SCHEMA_VERSION,
        command: name.to_string(),
        config,
        violations: count_violations(&results),
        results,
        wall_time: started.elapsed().as_secs_f64(),
        seed: cli.global.seed,
        precision_mode: cli.global.precision.into(),
        exit_code,
    };
    let to_stdout = cli.global.json.as_deref() == Some(std::path::Path::new("-"));
    if !to_stdout {
        let mut out = std::io::stdout().lock();
        for line in &lines {
            let _ = writeln!(out, "{line}");
        }
    }
    if let Some(path) = &cli.global.json {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        if to_stdout {
            println!("{text}");
        } else if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("error: cannot write report to {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    exit_code
}

pub fn count_violations(results: &[Entry]) -> usize {
    results
        .iter()
        .map(|e| match e {
            Entry::Eval(ev) => ev
                .claim
                .as_ref()
                .map_or(0, |c| c.margin.is_violated() as usize),
            Entry::Check(c) => c.margin.is_violated() as usize,
            Entry::Fuzz(f) => f.violations,
            Entry::Search(s) => s.found_violation() as usize,
            Entry::RemarkA(a) => a.check.margin.is_violated() as usize,
            Entry::RemarkB(b) => b.check.margin.is_violated() as usize,
            Entry::RemarkC(c) => c.clearance.violations,
            Entry::RemarkD(d) => d.checks.iter().filter(|c| c.margin.is_violated()).count(),
            Entry::Sweep(s) => s.violations,
            Entry::Threshold(_) | Entry::Error(_) => 0,
        })
        .sum()
}
