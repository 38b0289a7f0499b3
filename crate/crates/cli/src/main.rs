//! Command-line surface: train the reference model, attack instances,
//! run batch experiments and analyses, probe realism, and map probabilities
//! to credit scores.
//!
//! Exit codes: 0 success, 1 attack did not converge (`attack` only),
//! 2 usage/config error, 3 model backend failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Session;
use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Backend(String),
    NotConverged,
}

pub type CliResult<T> = Result<T, CliError>;

impl From<permute_attack::Error> for CliError {
    fn from(e: permute_attack::Error) -> Self {
        use permute_attack::Error as E;
        match e {
            E::Backend(_) | E::Timeout(_) | E::Protocol(_) => CliError::Backend(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "permute-attack", version, about = "In-distribution counterfactual examples for tabular classifiers")]
struct Cli {
    /// Run configuration (TOML). Flags override config fields.
    #[arg(long, global = true, default_value = "permute.toml")]
    config: PathBuf,
    /// Override the attack seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Conditional (Gibbs) sampling for multi-feature perturbations.
    #[arg(long, global = true, value_parser = ["on", "off"])]
    gibbs: Option<String>,
    /// Worker threads for batch commands (0 = all cores, 1 = sequential).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the builtin reference forest and persist model + schema.
    Train,
    /// Generate counterfactuals for one instance.
    Attack {
        /// Row index into the dataset.
        #[arg(long)]
        row: Option<usize>,
        /// Inline JSON instance: {"feature": value, ...}.
        #[arg(long)]
        instance: Option<String>,
        /// Target class (label string or index); defaults to the opposite
        /// class for binary models.
        #[arg(long)]
        target: Option<String>,
        /// Number of distinct counterfactuals to search for.
        #[arg(long, default_value_t = 1)]
        n_counterfactuals: usize,
        /// Features the attack must not touch.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
        /// Restrict the attack to exactly these features.
        #[arg(long, value_delimiter = ',')]
        allow_only: Vec<String>,
    },
    /// Attack every test row and write results, summary, and histogram.
    Batch {
        /// Attack only the first N test rows.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        target: Option<String>,
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        allow_only: Vec<String>,
    },
    /// Recompute summary and co-occurrence graph from saved results.
    Analyze {
        /// Results file (defaults to <out>/results.json).
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Discriminator fail rates for counterfactuals with and without
    /// conditional sampling.
    Realism {
        /// Use only the first N test rows.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Map probabilities of default to credit scores.
    Score {
        /// Comma-separated probabilities of default.
        #[arg(long, value_delimiter = ',')]
        pd: Vec<f64>,
        /// Render score tables from a saved results file.
        #[arg(long)]
        results: Option<PathBuf>,
    },
}

#[derive(Parser)]
struct CliWithCommand {
    #[command(flatten)]
    common: Cli,
    #[command(subcommand)]
    command: Command,
}

fn run(cli: CliWithCommand) -> CliResult<()> {
    let config = RunConfig::load(&cli.common.config).map_err(CliError::Usage)?;
    let session = Session::new(config, cli.common.out.clone(), cli.common.workers);
    let gibbs = cli.common.gibbs.as_deref().map(|v| v == "on");
    match cli.command {
        Command::Train => commands::cmd_train(&session),
        Command::Attack {
            row,
            instance,
            target,
            n_counterfactuals,
            exclude,
            allow_only,
        } => commands::cmd_attack(
            &session,
            row,
            instance,
            &target,
            n_counterfactuals,
            &exclude,
            &allow_only,
            gibbs,
            cli.common.seed,
        ),
        Command::Batch {
            limit,
            target,
            exclude,
            allow_only,
        } => commands::cmd_batch(
            &session,
            limit,
            &target,
            &exclude,
            &allow_only,
            gibbs,
            cli.common.seed,
        ),
        Command::Analyze { results } => commands::cmd_analyze(&session, results),
        Command::Realism { limit } => commands::cmd_realism(&session, limit),
        Command::Score { pd, results } => commands::cmd_score(&session, &pd, results),
    }
}

fn main() -> ExitCode {
    let cli = CliWithCommand::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::NotConverged) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Backend(msg)) => {
            eprintln!("backend error: {msg}");
            ExitCode::from(3)
        }
    }
}
