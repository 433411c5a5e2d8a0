//! `zefcode`: build and check variable-length quantum codes, condense
//! codeword strings and run compression experiments from a TOML config.

/// `print!` that exits quietly when stdout is a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        if let Err(e) = write!(std::io::stdout(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            panic!("failed writing to stdout: {e}");
        }
    }};
}

/// `println!` counterpart of [`out!`].
macro_rules! outln {
    ($($arg:tt)*) => {{
        out!($($arg)*);
        out!("\n");
    }};
}

mod commands;
mod config;
mod error;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Options;
use config::Config;
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "zefcode", version, about = "Variable-length quantum codes")]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for Monte-Carlo sampling; overrides the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Enumerate all N-tuples instead of sampling.
    #[arg(long, global = true)]
    exact: bool,
    /// Also run the pointer machine and write its trace.
    #[arg(long, global = true)]
    machine: bool,
    /// Output file; overrides the config.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kraft sums, prefix-freeness and sector dimensions of the code.
    Kraft,
    /// Lift a classical code to a zef code (remapping if not prefix-free).
    Lift,
    /// Condense the configured codewords into one zef string.
    Condense,
    /// Truncation sweep CSV with sufficiency and necessity bounds.
    Compress,
    /// Length identity and block-coding table for the ensemble.
    Entropy,
    /// Quick built-in checks.
    Selftest,
}

fn run(cli: Cli) -> CliResult<()> {
    let opts = Options {
        seed: cli.seed,
        exact: cli.exact,
        machine: cli.machine,
        out: cli.out,
    };
    if let Command::Selftest = cli.command {
        return commands::selftest();
    }
    let path = cli
        .config
        .ok_or_else(|| CliError::Validation("--config PATH is required".into()))?;
    let cfg = Config::load(&path)?;
    match cli.command {
        Command::Kraft => commands::kraft(&cfg),
        Command::Lift => commands::lift(&cfg, &opts),
        Command::Condense => commands::condense(&cfg, &opts),
        Command::Compress => commands::compress(&cfg, &opts),
        Command::Entropy => commands::entropy(&cfg),
        Command::Selftest => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
