use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mazegp_cli::{cmd_evolve, cmd_explain, cmd_gen_data, cmd_report, CliError, EvolveArgs, ExplainArgs, GenDataArgs, ReportArgs};

/// Evolve explainable programs that imitate a maze agent.
#[derive(Parser)]
#[command(name = "mazegp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roll out an oracle policy and slice sub-trajectory datasets.
    GenData(GenDataArgs),
    /// Run the curriculum on a directory of datasets.
    Evolve(EvolveArgs),
    /// Explain a program's decisions along one sub-trajectory.
    Explain(ExplainArgs),
    /// Aggregate per-length accuracy over run directories.
    Report(ReportArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenData(a) => {
            let out = cmd_gen_data(&a)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            for f in &out.files {
                println!("{}", f.display());
            }
        }
        Command::Evolve(a) => {
            let out = cmd_evolve(&a)?;
            let r = &out.report;
            println!(
                "{:?} at length {} in {:.1}s; best: {}",
                r.termination,
                r.max_length().unwrap_or(0),
                r.wall_clock_seconds,
                r.best_program
            );
        }
        Command::Explain(a) => print!("{}", cmd_explain(&a)?.1),
        Command::Report(a) => print!("{}", cmd_report(&a)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
