mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;

/// Multi-class TTN/MERA quantum classifiers on simulated qubits.
#[derive(Debug, Parser)]
#[command(name = "tnqc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Base random seed; every random stream derives from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file of `key = value` defaults; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter MNIST to a few digits, fit PCA on the training split and write
    /// scaled feature files. Takes raw (uncompressed) IDX files.
    PrepareMnist(commands::PrepareMnistArgs),
    /// Prepare XXZ ground states with VQE over a grid of anisotropies.
    GenXxz(commands::GenXxzArgs),
    /// Train a classifier once per seed and report mean ± std test accuracy.
    Train(commands::TrainArgs),
    /// Accuracy and confusion matrix of a checkpoint on a dataset.
    Eval(commands::EvalArgs),
    /// Multinomial logistic regression on feature files.
    Baseline(commands::BaselineArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::PrepareMnist(a) => commands::prepare_mnist(a),
        Command::GenXxz(a) => commands::gen_xxz(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Baseline(a) => commands::baseline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 1,
                CliError::Data(_) => 2,
                CliError::Numerical(_) => 3,
            })
        }
    }
}
