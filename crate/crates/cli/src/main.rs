mod commands;
mod config;
mod render;
mod source;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{RenderArgs, RunArgs, SweepArgs, VerifyArgs};

/// Batch scheduling simulator for LLM decoding under a KV-cache budget.
#[derive(Debug, Parser)]
#[command(name = "kvsched", version, about, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
#[command(args_override_self = true)]
enum Command {
    /// Run one policy on one instance and write CSV outputs.
    Run(Box<RunArgs>),
    /// Run policies over a grid of n, M, alpha and beta.
    Sweep(Box<SweepArgs>),
    /// Run a property suite; exits 2 on any failure.
    Verify(VerifyArgs),
    /// Draw a memory-profile SVG from exported CSVs.
    Render(RenderArgs),
}

fn main() -> ExitCode {
    let argv = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = Cli::parse_from(argv);
    let result = match &cli.command {
        Command::Run(a) => commands::cmd_run(a).map(|_| true),
        Command::Sweep(a) => commands::cmd_sweep(a).map(|_| true),
        Command::Verify(a) => commands::cmd_verify(a),
        Command::Render(a) => commands::cmd_render(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
