use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use due_cli::{cmd_compare, cmd_run, cmd_validate, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "due", version, about = "Dynamic user equilibrium experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write its artifacts.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        /// Also write every cumulative curve of the final loading.
        #[arg(long)]
        dump_dnl: bool,
        /// Overrides the solver seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output directory of the config.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a network directory without solving.
    Validate { dir: PathBuf },
    /// Run several configurations on one instance and tabulate them side by side.
    Compare {
        #[arg(short, long = "config", required = true)]
        configs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        dump_dnl: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error [{}]: {e}", e.category());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, dump_dnl, seed, output } => {
            match cmd_run(&config, &RunOptions { dump_dnl, seed, output_dir: output }) {
                Ok(r) => {
                    for w in &r.outcome.warnings {
                        eprintln!("warning: {w}");
                    }
                    println!(
                        "{}: {} iterations ({}), {} operator calls, median gap {:.4}, outputs in {}",
                        r.name,
                        r.outcome.iterations,
                        r.outcome.stop.name(),
                        r.outcome.evaluations,
                        r.gaps.median().unwrap_or(0.0),
                        r.output_dir.display()
                    );
                    if let Some((first, last, ratio)) = r.energy_ratio() {
                        println!("relative energy {first:.3e} -> {last:.3e} (ratio {ratio:.1})");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Validate { dir } => {
            let report = cmd_validate(&dir);
            print!("{}", report.table());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Compare { configs, output, dump_dnl, seed } => {
            match cmd_compare(&configs, &output, &RunOptions { dump_dnl, seed, output_dir: None }) {
                Ok(c) => {
                    println!("{:<16} {:>10} {:>10} {:>12} {:>12}", "run", "algorithm", "iterations", "energy", "median gap");
                    for r in &c.runs {
                        let last = r.energy_ratio().map(|e| e.1).unwrap_or(f64::NAN);
                        println!(
                            "{:<16} {:>10} {:>10} {:>12.3e} {:>12.4}",
                            r.name,
                            r.outcome.log.algorithm.name(),
                            r.outcome.iterations,
                            last,
                            r.gaps.median().unwrap_or(0.0)
                        );
                    }
                    println!("tables in {}", c.output_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
