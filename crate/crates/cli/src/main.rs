//! `gcorr`: verify correlation inequalities on JSON-defined instances and
//! emit JSON reports and CSV data files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gcorr_core::Error;

/// Exit status of a run. Codes 0 to 3 follow the documented contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Violated = 1,
    Inapplicable = 2,
    Usage = 3,
    Numerical = 4,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Inapplicable(String),
    Numerical(String),
}

impl Failure {
    fn status(&self) -> Status {
        match self {
            Failure::Usage(_) => Status::Usage,
            Failure::Inapplicable(_) => Status::Inapplicable,
            Failure::Numerical(_) => Status::Numerical,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Hypothesis(_) => Failure::Inapplicable(e.to_string()),
            Error::NonConvergence { .. } | Error::LowAcceptance { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "gcorr", version, about = "Numerical checks of nonsymmetric Gaussian correlation inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verify one theorem instance and write a JSON report.
    Verify(VerifyArgs),
    /// Tabulate the ball-correlation profile Phi(t) and its derivative.
    Profile(ProfileArgs),
    /// Search for negative gaps with one hypothesis deliberately broken.
    Scan(ScanArgs),
    /// Tabulate the monotone transport map between two 1D densities.
    Transport(TransportArgs),
    /// Verify many random instances of one theorem.
    Batch(BatchArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// 1.1, 1.2, 2.1, 3.1, 4.1 or corollary.
    #[arg(long)]
    pub theorem: String,
    /// Instance JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// JSON with `field` and a radial `measure`.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: f64,
    #[arg(long)]
    pub t_steps: usize,
    /// Monte Carlo samples per radius (d >= 3).
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Sphere directions for the radial quadrature (d <= 2).
    #[arg(long, default_value_t = 256)]
    pub dirs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// origin-not-in-A, A-not-projection-closed, phi-not-decreasing or tilt-not-logconcave.
    #[arg(long = "break")]
    pub broken: String,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransportArgs {
    /// Source density JSON.
    #[arg(long)]
    pub source: PathBuf,
    /// Target density JSON.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(long)]
    pub theorem: String,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    /// Comma-separated dimensions, cycled over the instances.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("GCORR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("GCORR_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Usage as u8 } else { 0 });
        }
    };
    let result = init_threads().and_then(|()| match cli.command {
        Command::Verify(a) => commands::verify(&a),
        Command::Profile(a) => commands::profile(&a),
        Command::Scan(a) => commands::scan(&a),
        Command::Transport(a) => commands::transport(&a),
        Command::Batch(a) => commands::batch(&a),
    });
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Inapplicable(m) => eprintln!("inapplicable: {m}"),
                Failure::Numerical(m) => eprintln!("numerical failure: {m}"),
            }
            ExitCode::from(f.status() as u8)
        }
    }
}
