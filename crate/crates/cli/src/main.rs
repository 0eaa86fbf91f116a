//! `cdi`: compile propositions into coherence graphs, rank constrained
//! cuts, weight near-optimal cuts with a Gibbs ensemble, and report.

mod artifacts;
mod commands;
mod error;

use clap::{Parser, Subcommand};

use error::CliError;

#[derive(Parser)]
#[command(name = "cdi", version, about = "Coherence-driven inference pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile propositions into graph samples, their median, and a
    /// convergence profile
    Compile(commands::compile::CompileArgs),
    /// Rank constrained cuts of a coherence graph
    Solve(commands::solve::SolveArgs),
    /// Weight ranked cuts by a Gibbs ensemble; optionally emit outcome tables
    Analyze(commands::analyze::AnalyzeArgs),
    /// Summarize a run directory as markdown plus DOT renderings
    Report(commands::report::ReportArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compile(args) => commands::compile::run(&args),
        Command::Solve(args) => commands::solve::run(&args),
        Command::Analyze(args) => commands::analyze::run(&args),
        Command::Report(args) => commands::report::run(&args),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
