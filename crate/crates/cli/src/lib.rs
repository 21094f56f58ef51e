//! The `promise` command line: `check`, `explore`, `run` and
//! `verify-trace` over `.promise` scenario files.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::execute;

/// Exit status of a successful command.
pub const EXIT_OK: i32 = 0;
/// Validation failure, invariant violation or rejected trace.
pub const EXIT_FAILURE: i32 = 1;
/// Node or trace limit reached.
pub const EXIT_LIMIT: i32 = 2;
/// Bad invocation or unreadable input file.
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "promise", version, about = "Check, explore, run and verify promise scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a scenario and re-verify the task-body and incompatibility laws
    Check(Options),
    /// Build the full transition system and list every maximal trace
    Explore(Options),
    /// Perform one seeded random walk and print its trace
    Run(Options),
    /// Replay a trace file against a scenario
    VerifyTrace(Options),
}

impl Command {
    pub fn options(&self) -> &Options {
        match self {
            Command::Check(o) | Command::Explore(o) | Command::Run(o) | Command::VerifyTrace(o) => o,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Scenario file (`.promise`)
    pub scenario: PathBuf,
    /// Trace file to verify (verify-trace only)
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Check incompatibility against all of a promiser's promises, not only
    /// those toward the same promisee
    #[arg(long)]
    pub strict_conflicts: bool,
    /// Seed for `run`
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Give up once the transition system has this many states
    #[arg(long, default_value_t = promise_core::explorer::DEFAULT_NODE_LIMIT, value_parser = positive)]
    pub node_limit: usize,
    /// Give up once more maximal traces than this are found
    #[arg(long, default_value_t = promise_core::explorer::DEFAULT_MAX_TRACES)]
    pub max_traces: usize,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Parses `args` (program name first) and runs the command, returning the
/// exit status.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, out, err),
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            }
        }
    }
}
