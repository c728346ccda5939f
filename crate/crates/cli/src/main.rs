use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mirror_margin_cli::{execute, sweep, Command, Overrides};

#[derive(Parser)]
#[command(
    name = "mirror-margin",
    version,
    about = "Mirror descent, horizon functions and max-margin limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run mirror descent and compare its direction with the max-margin solution
    Run(Common),
    /// Probe the normalized sublevel sets of a potential
    Horizon(Common),
    /// Check the loss, potential and dataset assumptions
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON)
    #[arg(required_unless_present = "sweep")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip SVG output
    #[arg(long)]
    no_plots: bool,
    /// Run every config matching a glob, each in its own output directory
    #[arg(long, value_name = "GLOB", conflicts_with = "config")]
    sweep: Option<String>,
    /// Override the dataset generator seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Run(a) => (Command::Run, a),
        Cmd::Horizon(a) => (Command::Horizon, a),
        Cmd::Check(a) => (Command::Check, a),
    };
    let code = match (&args.sweep, &args.config) {
        (Some(pattern), _) => {
            let threads = std::env::var("MIRROR_MARGIN_THREADS")
                .ok()
                .and_then(|v| v.parse().ok());
            let overrides = Overrides {
                out: None,
                no_plots: args.no_plots,
                seed: args.seed,
            };
            let out = args.out.unwrap_or_else(|| PathBuf::from("out"));
            sweep(command, pattern, &out, &overrides, threads)
        }
        (None, Some(path)) => execute(
            command,
            path,
            &Overrides {
                out: args.out,
                no_plots: args.no_plots,
                seed: args.seed,
            },
        ),
        (None, None) => unreachable!("clap requires a config or --sweep"),
    };
    ExitCode::from(code)
}
