use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybrid_astar::cli;

/// Guided and extended Hybrid A* experiments.
#[derive(Parser)]
#[command(name = "plan", version)]
struct Args {
    /// Write zeros instead of wall-clock timings so outputs are reproducible.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its outputs.
    Run { config: PathBuf },
    /// Run several configs and write comparison.csv.
    Compare {
        configs: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Print the default run config as JSON.
    PrintDefaults,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let code = match args.command {
        Command::Run { config } => cli::cmd_run(&config, args.no_timing),
        Command::Compare { configs, out_dir } => cli::cmd_compare(&configs, &out_dir, args.no_timing),
        Command::PrintDefaults => {
            println!("{}", cli::defaults_json());
            cli::EXIT_OK
        }
    };
    ExitCode::from(code as u8)
}
