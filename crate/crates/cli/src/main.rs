mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use srgm::SrgmError;

#[derive(Parser, Debug)]
#[command(name = "srgm", version, about = "Sparse random graph model for directed networks")]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write outputs here instead of stdout.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Use the full-size study grids instead of the desk-scale defaults.
    #[arg(long, global = true)]
    pub full: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit an edge list (and optional covariates) with tuning and Wald intervals.
    Fit(FitArgs),
    /// Run the Monte-Carlo simulation study.
    Simulate(SimulateArgs),
    /// Giant-component bias experiments.
    Bias {
        #[command(subcommand)]
        which: BiasCommand,
    },
    /// Check the matrix conditions on an instance or a random sweep.
    Check(CheckArgs),
    /// Draw one synthetic dataset from the simulation design.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TuneArg {
    Bic,
    Heuristic,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Edge list: `# n=<count>` header, then `i<TAB>j` per edge (1-based).
    #[arg(long)]
    pub edges: PathBuf,
    /// Covariates: `# n=<n> p=<p>` header, then `i<TAB>j<TAB>z...` per pair.
    #[arg(long)]
    pub covariates: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bic", conflicts_with = "lambda")]
    pub tune: TuneArg,
    /// Fit at this penalty instead of tuning.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Confidence parameter of the heuristic penalty.
    #[arg(long, default_value_t = 3.0)]
    pub t: f64,
    /// Multiply the heuristic penalty by 8.
    #[arg(long)]
    pub strict_factor_8: bool,
    #[arg(long, default_value_t = 50)]
    pub path_points: usize,
    #[arg(long, default_value_t = 200.0)]
    pub path_ratio: f64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Evaluate the interval weights at an unpenalized refit on the support.
    #[arg(long)]
    pub refit_on_support: bool,
    #[arg(long)]
    pub no_inference: bool,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol_kkt: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// TOML study configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub s0: Option<Vec<usize>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub tuning: Option<Vec<TuneArg>>,
    #[arg(long)]
    pub path_points: Option<usize>,
    #[arg(long)]
    pub strict_factor_8: bool,
    #[arg(long)]
    pub refit_on_support: bool,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    ErBias,
    SbmGrid,
}

#[derive(Subcommand, Debug)]
pub enum BiasCommand {
    /// Erdos-Renyi: density of the giant component against the truth.
    Er {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        /// Sweep a lambda grid instead of one value.
        #[arg(long, value_enum)]
        figure: Option<Figure>,
        #[arg(long, default_value_t = 1.3)]
        lmin: f64,
        #[arg(long, default_value_t = 7.0)]
        lmax: f64,
        #[arg(long, default_value_t = 12)]
        points: usize,
    },
    /// Two-block SBM: spectral ratio of giant-component estimates.
    Sbm {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        b: f64,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        /// Estimate from the whole graph rather than the giant component.
        #[arg(long)]
        full_graph: bool,
        /// Sweep a grid of (a, b) instead of one pair.
        #[arg(long, value_enum)]
        figure: Option<Figure>,
        #[arg(long, default_value_t = 12.0)]
        grid_max: f64,
        #[arg(long, default_value_t = 1.0)]
        grid_step: f64,
        /// Keep grid points with a + b at least this.
        #[arg(long, default_value_t = 2.5)]
        min_sum: f64,
    },
    /// Limiting bias of the ER giant component as a function of lambda.
    Curve {
        #[arg(long, default_value_t = 1.3)]
        lmin: f64,
        #[arg(long, default_value_t = 7.0)]
        lmax: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InstanceArg {
    /// No covariates and all parameters zero: every p_ij = 1/2.
    Uniform,
    /// The simulation template with freshly drawn covariates.
    Template,
    /// Truth from a fit JSON document plus a covariate file.
    File,
    /// Random instances for the two lemma checks.
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    All,
    Dependency,
    Incoherence,
    Compatibility,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    pub instance: InstanceArg,
    #[arg(long, value_enum, default_value = "all")]
    pub check: CheckArg,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Active set for `uniform`, e.g. `a1,b2` (1-based nodes); `none` for empty.
    #[arg(long, default_value = "a1")]
    pub support: String,
    /// Sparsity of the `template` instance.
    #[arg(long, default_value_t = 6)]
    pub s0: usize,
    /// JSON with alpha, beta, mu, gamma (fit document or truth.json) for `file`.
    #[arg(long)]
    pub theta: Option<PathBuf>,
    #[arg(long)]
    pub covariates: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub probes: usize,
    #[arg(long)]
    pub c_min: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub n_min: usize,
    #[arg(long, default_value_t = 30)]
    pub n_max: usize,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 150)]
    pub n: usize,
    #[arg(long, default_value_t = 6)]
    pub s0: usize,
    /// Replication index within the seed.
    #[arg(long, default_value_t = 0)]
    pub rep: usize,
}

/// Failure carrying the process exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(SrgmError),
    NotConverged(String),
}

impl From<SrgmError> for CliError {
    fn from(e: SrgmError) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

fn lib_code(e: &SrgmError) -> u8 {
    match e {
        SrgmError::NotConverged { .. } => 2,
        SrgmError::Path { source, .. } => lib_code(source),
        SrgmError::InvalidInput(_) | SrgmError::NoSubcriticalSolution { .. } => 64,
        SrgmError::Parse { .. } | SrgmError::DimensionMismatch { .. } | SrgmError::Io(_) => 65,
        _ => 70,
    }
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::NotConverged(_) => 2,
            CliError::Lib(e) => lib_code(e),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::NotConverged(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("srgm: cannot start {t} threads: {e}");
            return ExitCode::from(70);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("srgm: {e}");
            ExitCode::from(e.code())
        }
    }
}
