use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sivstrain_cli::commands::{execute, Command};
use sivstrain_cli::config::{self, Format};
use sivstrain_cli::output::write_report;
use sivstrain_cli::{CliError, CliResult, EXIT_USAGE};

/// Strain, spin-orbit and Zeeman model of the silicon-vacancy center.
#[derive(Debug, Parser)]
#[command(name = "sivstrain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config, or an earlier output whose embedded config is reused.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Seed for stochastic fixture generation.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Override one config field, e.g. `--set rate.temperature=0.1`.
    #[arg(long = "set", global = true, value_name = "KEY=JSON")]
    overrides: Vec<String>,
}

fn run(cli: &Cli) -> CliResult<()> {
    let mut cfg = config::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    let report = execute(cli.command, &cfg)?;
    let mut buf = Vec::new();
    write_report(&mut buf, cli.command.name(), &cfg, &report).map_err(|e| CliError::from_io(&e, "output"))?;
    match &cli.out {
        Some(path) => fs::write(path, &buf).map_err(|e| CliError::usage("io", format!("{}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(&buf)
            .map_err(|e| CliError::usage("io", format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code as u8)
        }
    }
}
