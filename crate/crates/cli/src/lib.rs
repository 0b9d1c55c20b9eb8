//! Command-line front end: argument parsing, configuration merging and the
//! four subcommands.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use bbsb::mixture::Variant;
use config::{KappaList, Location, ModelKind, RunConfig, SigmaSetting};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] bbsb::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "bbsb", version, about = "Beta-Binomial stick-breaking mixtures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate length-variable and weight trajectories.
    SimulateChain(SimulateArgs),
    /// Monte Carlo prior distribution of the number of groups K_n.
    PriorKn(PriorKnArgs),
    /// Fit a mixture model by slice-Gibbs sampling.
    Fit(FitArgs),
    /// Generate a synthetic dataset.
    GenerateData(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON file with flat keys; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated kappa values, e.g. `0,10,100,inf`.
    #[arg(long)]
    pub kappa: Option<KappaList>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub sticks: Option<usize>,
    /// Shared first length variable (drawn from the prior when absent).
    #[arg(long)]
    pub v1: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PriorKnArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub kappa: Option<KappaList>,
    /// Alpha held fixed during the theta sweep.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Theta held fixed during the alpha sweep.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub thetas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Sample size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// `random`, `inf`, an integer, or a comma-separated list of these.
    #[arg(long)]
    pub kappa: Option<KappaList>,
    /// Upper end of the uniform prior on kappa.
    #[arg(long)]
    pub kappa_max: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Pitman-Yor discount: a value or `random`.
    #[arg(long)]
    pub sigma: Option<SigmaSetting>,
    #[arg(long)]
    pub sigma_grid_points: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Built-in database (1, 2 or 3) to simulate when --data is absent.
    #[arg(long)]
    pub db: Option<u32>,
    /// Dataset file (CSV with header `y`, or JSON).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Custom mixture spec JSON to simulate from.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub grid_min: Option<f64>,
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Base-measure location: a number or `data-mean`.
    #[arg(long)]
    pub base_location: Option<Location>,
    #[arg(long)]
    pub base_scale: Option<f64>,
    #[arg(long)]
    pub base_shape: Option<f64>,
    #[arg(long)]
    pub base_rate: Option<f64>,
    /// Database-1 preset: 3000 iterations, no burn-in, kappa in {0,10,100,inf}.
    #[arg(long)]
    pub replicate_db1: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub db: Option<u32>,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
}

impl CommonArgs {
    fn base(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => config::load_config(path)?,
            None => RunConfig::default(),
        };
        Ok(file.overlay(RunConfig {
            seed: self.seed,
            out: self.out.clone(),
            ..Default::default()
        }))
    }
}

impl Command {
    /// Merged configuration: file values overlaid by the given flags.
    pub fn config(&self) -> Result<RunConfig, CliError> {
        Ok(match self {
            Command::SimulateChain(a) => a.common.base()?.overlay(RunConfig {
                kappa: a.kappa.clone(),
                alpha: a.alpha,
                theta: a.theta,
                sticks: a.sticks,
                v1: a.v1,
                ..Default::default()
            }),
            Command::PriorKn(a) => a.common.base()?.overlay(RunConfig {
                kappa: a.kappa.clone(),
                alpha: a.alpha,
                theta: a.theta,
                thetas: a.thetas.clone(),
                alphas: a.alphas.clone(),
                n: a.n,
                reps: a.reps,
                ..Default::default()
            }),
            Command::Fit(a) => a.common.base()?.overlay(RunConfig {
                model: a.model,
                kappa: a.kappa.clone(),
                kappa_max: a.kappa_max,
                alpha: a.alpha,
                theta: a.theta,
                sigma: a.sigma,
                sigma_grid_points: a.sigma_grid_points,
                iterations: a.iterations,
                burn_in: a.burn_in,
                variant: a.variant,
                db: a.db,
                data: a.data.clone(),
                spec: a.spec.clone(),
                n: a.n,
                grid_min: a.grid_min,
                grid_max: a.grid_max,
                grid_points: a.grid_points,
                base_location: a.base_location,
                base_scale: a.base_scale,
                base_shape: a.base_shape,
                base_rate: a.base_rate,
                replicate_db1: a.replicate_db1.then_some(true),
                ..Default::default()
            }),
            Command::GenerateData(a) => a.common.base()?.overlay(RunConfig {
                db: a.db,
                spec: a.spec.clone(),
                n: a.n,
                ..Default::default()
            }),
        })
    }
}

/// Runs the parsed command and returns the files it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = cli.command.config()?;
    match &cli.command {
        Command::SimulateChain(_) => commands::simulate_chain(&cfg),
        Command::PriorKn(_) => commands::prior_kn(&cfg),
        Command::Fit(_) => commands::fit(&cfg),
        Command::GenerateData(_) => commands::generate_data(&cfg),
    }
}
