use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use isac_cli::commands::{Command, RunArgs};
use isac_cli::OutputFormat;

/// Sensing/communication experiments for OFDM ISAC signaling.
#[derive(Debug, Parser)]
#[command(name = "isac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config's `master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: $ISAC_OUT or ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for Monte Carlo stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let out = cli
        .out
        .or_else(|| std::env::var_os("ISAC_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let args = RunArgs {
        command: cli.command,
        config: cli.config,
        seed: cli.seed,
        out,
        format: cli.format,
    };
    match isac_cli::run(&args) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
