//! `nsplan`: runs the method matrix over the task registry, validates plan
//! files, recomputes metrics from traces and manages the macro library.

mod library;
mod report;
mod run;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "nsplan", version, about = "Hierarchical neuro-symbolic task planning harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan, verify and execute tasks under one or more methods.
    Run(run::RunArgs),
    /// Validate a plan file against a domain and an initial state.
    Validate {
        /// One grounded action per line, e.g. `pick_up(Egg-1)`.
        plan: PathBuf,
        /// Domain file; defaults to the built-in kitchen domain.
        #[arg(long)]
        domain: Option<PathBuf>,
        /// Initial-state triples; defaults to the built-in kitchen scene.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Recompute results.csv and summary.md from run traces.
    Metrics {
        /// Directory holding `trace-<task>-<method>.jsonl` files.
        traces: PathBuf,
        /// Output directory; defaults to the trace directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect and maintain a macro-action library.
    Library {
        #[command(subcommand)]
        command: library::LibraryCommand,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run::cmd_run(args),
        Command::Validate { plan, domain, state } => validate::cmd_validate(&plan, domain.as_deref(), state.as_deref()),
        Command::Metrics { traces, out } => report::cmd_metrics(&traces, out.as_deref()),
        Command::Library { command } => library::cmd_library(command),
    };
    match result {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
