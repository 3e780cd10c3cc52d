//! `dgof`: degree-based goodness-of-fit tests and simulation studies.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Common, NullSpec};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dgof", version, about = "Degree-based goodness-of-fit tests for random graph models")]
struct Cli {
    /// Master seed; overrides any seed in a config file [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Test level; overrides any alpha in a config file [default: 0.05].
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Worker threads [default: available parallelism]. Results do not
    /// depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory [default: current directory; `test` writes files
    /// only when given].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a graph from a probability matrix (CSV) or a graphon (JSON).
    Sample {
        /// Model file.
        model: PathBuf,
        /// Node count, required for graphons.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Test an edge list against a null model.
    Test {
        /// Edge list: one `i j` pair of 0-based ids per line.
        graph: PathBuf,
        /// er | her:MATRIX.csv | eg:GRAPHON.json | covariates:COV.csv
        #[arg(long)]
        null: NullSpec,
        /// Node count when it cannot be taken from the null model
        /// [default: largest id + 1].
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Analytic and Monte-Carlo power on a design grid.
    Power { config: PathBuf },
    /// Plug-in degree variance test against the known-density test under ER.
    Simulate { config: PathBuf },
    /// Normality of the standardized statistic in sparse regimes.
    Qq { config: PathBuf },
    /// Fit a logistic null model on edge covariates.
    FitNull {
        graph: PathBuf,
        #[arg(long)]
        covariates: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let common = Common {
        seed: cli.seed,
        alpha: cli.alpha,
        out: cli.out,
    };
    match cli.command {
        Command::Sample { model, n } => commands::sample(&model, n, &common),
        Command::Test { graph, null, nodes } => commands::test(&graph, &null, nodes, &common),
        Command::Power { config } => commands::power(&config, &common),
        Command::Simulate { config } => commands::simulate(&config, &common),
        Command::Qq { config } => commands::qq(&config, &common),
        Command::FitNull { graph, covariates } => commands::fit_null(&graph, &covariates, &common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            commands::print(&text);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dgof: {e}");
            ExitCode::from(e.code())
        }
    }
}
