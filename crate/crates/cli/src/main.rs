mod commands;
mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{Format, GlobalConfig};

/// Noncommutative central moments, optimal states and spectral geometry.
#[derive(Debug, Parser)]
#[command(name = "ncmoment", version)]
struct Cli {
    /// JSON config with `tolerances`, `seed`, `output` and `format`.
    #[arg(long, global = true, env = "NCMOMENT_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for every randomized computation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DilationChoice {
    Halmos,
    UnitaryMean,
    Doubling,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Central moments `Tr[D |A - Tr(DA)|^p]`.
    Moment {
        #[arg(long)]
        matrix: PathBuf,
        /// Density matrix file; the maximally mixed state if omitted.
        #[arg(long)]
        density: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "2")]
        p: Vec<f64>,
        /// Also check the bounds by the Chebyshev radius (exit 1 if one fails).
        #[arg(long)]
        bounds: bool,
    },
    /// Largest central moment over all states.
    Mu {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
    },
    /// Rank-one projection with the same moment constraints as a density.
    Reduce {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        density: PathBuf,
        #[arg(long)]
        p: f64,
    },
    /// `min_lambda ||A - lambda||` and its minimizer.
    Chebyshev {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Largest distance between two eigenvalues.
    Spread {
        #[arg(long)]
        matrix: PathBuf,
    },
    Dilate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        kind: DilationChoice,
        /// Divide by the operator norm first so any matrix becomes a contraction.
        #[arg(long)]
        normalize: bool,
        /// For `doubling`: move the spectrum's enclosing circle to the origin.
        #[arg(long)]
        centered: bool,
    },
    /// Block-diagonal compression and its Schatten contractivity.
    Pinch {
        #[arg(long)]
        matrix: PathBuf,
        /// 1-based blocks such as `1,2|3,4`; singletons if omitted.
        #[arg(long)]
        blocks: Option<String>,
        /// Matrix whose columns form the orthonormal basis of the blocks.
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "1")]
        p: Vec<f64>,
    },
    /// Bernoulli constants `b_p = max_t t^p (1-t) + t (1-t)^p`.
    Bernoulli {
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        p: Vec<f64>,
    },
    /// Brute-force maximum of the constrained quartic polynomial.
    Lemma1 {
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Randomized verification suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Dimensions to test; 2, 4 and 8 if omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        dim: Vec<usize>,
        /// Exponents to test; 1, 2 and 4 if omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        p: Vec<f64>,
        /// Record wall-clock time (reports are then no longer reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Reproduces the worked examples.
    Examples,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(ncmoment::Error),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<ncmoment::Error> for CliError {
    fn from(e: ncmoment::Error) -> Self {
        CliError::Core(e)
    }
}

/// Rendered output plus whether every check in it passed.
pub struct Output {
    pub text: String,
    pub passed: bool,
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let file = cli.config.as_deref().map(config::load_file).transpose()?;
    let cfg = GlobalConfig::resolve(file, cli.seed, cli.out, cli.format)?;
    let out = commands::dispatch(cli.command, &cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, &out.text).map_err(|e| CliError::io(path, e))?,
        None => print!("{}", out.text),
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) if out.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
