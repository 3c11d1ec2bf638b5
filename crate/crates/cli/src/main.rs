//! `hallnet` command line.
//!
//! Exit codes: 0 ok, 1 validation, 2 I/O, 3 numerical, 4 artifact mismatch.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hallnet_core::ModelKind;

use crate::config::RunConfig;
use crate::error::{CliError, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "hallnet", version, about = "Hall temperature predictors: simulate, train, sweep, compare, predict")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Mlp,
    Rbf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV from the configured design.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one network and save it as a JSON model document.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "mlp")]
        kind: Kind,
    },
    /// RBF neuron sweep plus MLP repetitions; writes reports and selected models.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare an MLP and an RBF model on the test partition.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Pass twice: one MLP and one RBF model.
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict hall temperature for each row of an input CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for a uniform grammar; validated if given.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<String, CliError> {
    match command {
        Command::Simulate { config, out } => commands::simulate(&RunConfig::load(&config)?, &out, &config),
        Command::Train { config, data, out, kind } => {
            let kind = match kind {
                Kind::Mlp => ModelKind::Mlp,
                Kind::Rbf => ModelKind::Rbf,
            };
            commands::train(&RunConfig::load(&config)?, kind, &data, &out, &config)
        }
        Command::Sweep { config, data, out } => commands::sweep(&RunConfig::load(&config)?, &data, &out, &config),
        Command::Compare { config, data, models, out } => {
            commands::compare(&RunConfig::load(&config)?, &data, &models, &out, &config)
        }
        Command::Predict { model, data, out, config } => {
            if let Some(c) = &config {
                RunConfig::load(c)?;
            }
            commands::predict(&model, &data, out.as_deref().map(Path::new))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.command) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hallnet: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
