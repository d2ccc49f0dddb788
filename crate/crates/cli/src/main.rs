//! `frustfree`: decide, reduce and analyse frustration-free 2-local spin-1/2 models.

mod commands;
mod io;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use frustfree_core::Error;

#[derive(Parser, Debug)]
#[command(name = "frustfree", version, about)]
struct Cli {
    /// Cross-check the result against exact diagonalization.
    #[arg(long, global = true)]
    verify: bool,

    /// Largest number of spins the verifier diagonalizes.
    #[arg(long, global = true, env = "FRUSTFREE_VERIFY_CAP", default_value_t = 14)]
    verify_cap: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the frustration verdict and the reduction path.
    Check { model: PathBuf },
    /// Reduce to a complete Hamiltonian and write the result as JSON.
    Reduce {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Kernel dimension and a basis of the ground manifold.
    Ground {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Expectation value over the maximally mixed ground manifold.
    Expect { model: PathBuf, observable: PathBuf },
    /// Entanglement bounds for a bipartition.
    Entangle(EntangleArgs),
    /// Monte Carlo cluster statistics on random d-dimensional lattices.
    Percolate(PercolateArgs),
    /// Variational energy of H0 + λ·H1 over the ground manifold of H0.
    Variational {
        #[arg(long)]
        h0: PathBuf,
        #[arg(long)]
        h1: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
    },
    /// Write a model in the JSON format.
    Generate(GenerateArgs),
    /// Exact diagonalization of a small model.
    Oracle { model: PathBuf },
}

#[derive(Args, Debug)]
struct EntangleArgs {
    model: PathBuf,
    /// JSON list of vertex labels, or `{"vertices": [...]}`.
    #[arg(long, conflicts_with = "rect")]
    region: Option<PathBuf>,
    /// Box `lo:hi` with comma-separated inclusive corners, e.g. `0,0:1,2`.
    #[arg(long, requires = "shape")]
    rect: Option<String>,
    /// Grid shape for `--rect`, e.g. `3,4`; vertices are taken in file order.
    #[arg(long)]
    shape: Option<String>,
    /// Growth exponent `c` of the area law.
    #[arg(long, default_value_t = 1.0)]
    exponent: f64,
    /// Isoperimetric constant `K`; enumerated from the model when absent.
    #[arg(long)]
    k: Option<f64>,
    /// Largest region enumerated for `K`.
    #[arg(long, default_value_t = frustfree_core::entanglement::DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args, Debug)]
struct PercolateArgs {
    #[arg(short)]
    d: usize,
    /// Comma-separated linear sizes.
    #[arg(short = 'L', value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(short)]
    p: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    periodic: bool,
    /// Per-trial CSV; standard output when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON summary; standard error when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// `chain:N`, `cycle:N`, `complete:N` or `grid:AxB[x..]`.
    #[arg(long, default_value = "chain:6")]
    lattice: String,
    /// Spins of a planted instance.
    #[arg(short, long, default_value_t = 4)]
    n: usize,
    /// Cluster merges of a grown instance, or rank-3 terms of a cascade instance.
    #[arg(long, default_value_t = 0)]
    count: usize,
    /// Name of a golden example.
    #[arg(long, default_value = "xx4cycle")]
    name: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Planted,
    Grown,
    Random,
    Cascade,
    Golden,
}

/// Failure categories and their exit codes.
#[derive(Debug)]
enum Failure {
    Frustrated(String),
    Input(anyhow::Error),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Frustrated(_) => 1,
            Failure::Input(_) => 2,
            Failure::Mismatch(_) => 3,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::FrustratedInput | Error::FrustratedH0 | Error::FrustratedSubsystem) => {
                Failure::Frustrated(format!("{e:#}"))
            }
            _ => Failure::Input(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::new(e).into()
    }
}

type Outcome = Result<(), Failure>;

fn run(cli: Cli) -> Outcome {
    let verify = cli.verify.then_some(cli.verify_cap);
    match cli.command {
        Command::Check { model } => commands::check(&model, verify),
        Command::Reduce { model, output } => commands::reduce(&model, output.as_deref(), verify),
        Command::Ground { model, output } => commands::ground(&model, output.as_deref(), verify),
        Command::Expect { model, observable } => commands::expect(&model, &observable, verify),
        Command::Entangle(args) => commands::entangle(&args, verify),
        Command::Percolate(args) => commands::percolate(&args, verify),
        Command::Variational { h0, h1, lambda } => commands::variational(&h0, &h1, lambda, verify),
        Command::Generate(args) => commands::generate(&args, verify),
        Command::Oracle { model } => commands::oracle(&model, cli.verify_cap),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Frustrated(msg) => eprintln!("error: {msg}"),
                Failure::Input(e) => eprintln!("error: {e:#}"),
                Failure::Mismatch(msg) => eprintln!("verification failed: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}
