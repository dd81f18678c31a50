mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{Output, EXIT_CONFIG};
use config::{Format, RunConfig};

type CommandFn = fn(&RunConfig, Format, Option<PathBuf>) -> Result<Output>;

#[derive(Parser)]
#[command(
    name = "heattrace",
    version,
    about = "Heat-trace coefficients and resolvent-trace checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Output file, overriding `output.path`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, overriding `output.format`
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the coefficient table up to `max_order`
    Coeffs(Common),
    /// Run the identity suite and the heat-coefficient round trip
    Verify(Common),
    /// Compare the resolvent trace with its expansion over `oracle.k_values`
    Scan(Common),
}

fn write_outputs(out: &Output) -> Result<()> {
    for (path, text) in &out.files {
        match path {
            Some(p) => {
                std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?
            }
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    let (common, cmd): (&Common, CommandFn) = match &cli.command {
        Command::Coeffs(c) => (c, commands::cmd_coeffs),
        Command::Verify(c) => (c, commands::cmd_verify),
        Command::Scan(c) => (c, commands::cmd_scan),
    };
    let cfg = RunConfig::load(&common.config)?;
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("setting up the thread pool")?;
    }
    let format = common.format.unwrap_or(cfg.output.format);
    let out = common.out.clone().or_else(|| cfg.output.path.clone());
    let output = cmd(&cfg, format, out)?;
    write_outputs(&output)?;
    eprint!("{}", output.log);
    Ok(output.status)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
