use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use manifold_vb_cli::{parse_config, run_experiment, Command, Overrides};

#[derive(Parser)]
#[command(name = "mvb", version, about = "Manifold variational Bayes experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Manifold Gaussian VB on a logistic or GARCH model.
    RunGvb(Flags),
    /// Manifold Wishart VB on the Gaussian covariance model.
    RunWvb(Flags),
    /// Fit the decay order of the momentum SGD recursion.
    RateCheck(Flags),
    /// Write a synthetic dataset to data.csv.
    GenerateData(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, flags) = match cli.command {
        Sub::RunGvb(f) => (Command::RunGvb, f),
        Sub::RunWvb(f) => (Command::RunWvb, f),
        Sub::RateCheck(f) => (Command::RateCheck, f),
        Sub::GenerateData(f) => (Command::GenerateData, f),
    };
    let overrides = Overrides {
        seed: flags.seed,
        samples: flags.samples,
        learning_rate: flags.lr,
        momentum_weight: flags.momentum,
        max_iterations: flags.max_iter,
        output: flags.out,
    };
    let start = Instant::now();
    let result = parse_config(command, flags.config.as_deref(), &overrides).and_then(|c| run_experiment(&c));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            eprintln!("{} finished in {:.2?}", command.name(), start.elapsed());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
