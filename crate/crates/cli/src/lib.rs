//! The `bss` command-line driver.
//!
//! Every run is determined by its subcommand, flags and seed. The CSV
//! outputs start with `# key=value` lines holding the full effective
//! configuration; stripped of the `# `, they form a config file that
//! reproduces the run with `--config`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod grid;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use args::{Cli, Command, Common};
use commands::Entries;
pub use error::CliError;

/// One-line account of a finished run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub command: &'static str,
    pub rows: usize,
    pub destination: String,
    pub seed: u64,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} rows written to {} (seed {})",
            self.command, self.rows, self.destination, self.seed
        )
    }
}

fn resolve_seed(text: &str) -> Result<u64, CliError> {
    if text == "random" {
        return Ok(rand::random());
    }
    text.parse()
        .map_err(|_| CliError::config(format!("seed must be a non-negative integer or `random`, got `{text}`")))
}

/// Parses `args` (program name first), runs the command and writes its output.
pub fn run<S: Into<String>>(args: impl IntoIterator<Item = S>) -> Result<Summary, CliError> {
    let args = config::expand_config(args.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(args)?;
    let (name, common): (&'static str, &Common) = match &cli.command {
        Command::Simulate(a) => ("simulate", &a.common),
        Command::Covmat(a) => ("covmat", &a.common),
        Command::Jtable(a) => ("jtable", &a.common),
        Command::Mse(a) => ("mse", &a.common),
        Command::Estimate(a) => ("estimate", &a.common),
        Command::Smile(a) => ("smile", &a.common),
    };
    let seed = resolve_seed(&common.seed)?;
    let mut entries: Entries = vec![("command".into(), name.into())];
    let exec = |entries: &mut Entries| match &cli.command {
        Command::Simulate(a) => commands::simulate(a, seed, entries),
        Command::Covmat(a) => commands::covmat(a, entries),
        Command::Jtable(a) => commands::jtable(a, entries),
        Command::Mse(a) => commands::mse(a, seed, entries),
        Command::Estimate(a) => commands::estimate(a, seed, entries),
        Command::Smile(a) => commands::smile_cmd(a, seed, entries),
    };
    let output = match common.threads {
        Some(0) => return Err(CliError::config("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?
            .install(|| exec(&mut entries))?,
        None => exec(&mut entries)?,
    };
    let destination = write_output(common.out.as_ref(), &output.bytes)?;
    Ok(Summary {
        command: name,
        rows: output.rows,
        destination,
        seed,
    })
}

fn write_output(out: Option<&PathBuf>, bytes: &[u8]) -> Result<String, CliError> {
    match out {
        Some(path) => {
            let name = path.display().to_string();
            std::fs::write(path, bytes).map_err(|e| CliError::io(&name, e))?;
            Ok(name)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("stdout", e))?;
            Ok("stdout".into())
        }
    }
}
