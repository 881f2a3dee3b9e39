//! `ocrs`: solve ex-ante relaxations, run and build schemes, and verify them.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "ocrs", version, about = "Online contention resolution schemes over matroids")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every stochastic path.
    #[arg(long, global = true, default_value_t = ocrs::rng::DEFAULT_SEED)]
    pub seed: u64,
    /// Monte Carlo trials; each command has its own default.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Worker threads for Monte Carlo; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Writes sampled selection traces as JSON lines.
    #[arg(long, global = true)]
    pub dump_traces: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    Adversarial,
    RandomOrder,
    Rank1Ocrs,
    Rank1Rcrs,
    Quarter,
    LpOcrs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fixed,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Threshold,
    BestResponse,
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    /// Instance file (JSON, schema version 1).
    #[arg(long)]
    pub instance: PathBuf,
    /// Overrides the point to round, e.g. `0.5,0.5`.
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<f64>>,
    /// Fixed arrival order, e.g. `2,0,1`; identity when absent.
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solves the ex-ante relaxation and decomposes its solution.
    SolveExante {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Measures a scheme's selectability and its ratio to the ex-ante optimum.
    Run {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum)]
        scheme: SchemeKind,
        /// A scheme written by `build-lp-ocrs`, for `--scheme lp-ocrs`.
        #[arg(long)]
        scheme_file: Option<PathBuf>,
        /// Skips exact evaluation and estimates selectability by Monte Carlo.
        #[arg(long)]
        estimate: bool,
        /// Width of the acceptance intervals in standard errors.
        #[arg(long, default_value_t = 3.0)]
        sigmas: f64,
    },
    /// Builds a randomized scheme by column generation over deterministic policies.
    BuildLpOcrs {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = OracleArg::Threshold)]
        oracle: OracleArg,
        #[arg(long, default_value_t = 200)]
        max_iterations: usize,
    },
    /// Runs the acceptance criteria.
    Verify {
        /// Criterion id, tag or name fragment.
        #[arg(long, default_value = "")]
        filter: String,
    },
    /// Optimality experiments: the two-element LP optimum and rank-1 ceilings.
    Optimality {
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_value = "2,5,10")]
        n: Vec<usize>,
    },
    /// Straw-man failure on Hat(n) against the LP-built scheme.
    Hat {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        hats: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        lp_hats: usize,
    },
    /// Writes the bundled instance corpus to a directory.
    ExportCorpus {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.global.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Error(e) => eprintln!("error: {e}"),
                Failure::Acceptance(msg) => eprintln!("acceptance failed: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}
