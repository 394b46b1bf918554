//! Command-line front end for `isotwirl`.
//!
//! Subcommands write CSV or JSON to `--out` (or stdout) and can emit a
//! gnuplot script next to the data. Exit codes: 0 ok, 1 usage, 2 failed
//! verification, 3 IO.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod cmd;
pub mod output;

/// Top-level parser.
#[derive(Debug, Parser)]
#[command(name = "isotwirl", version, about = "Isospectral twirling: form factors, probes of chaos and verification suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rescaled form factors c̃₂, Re c̃₃ or c̃₄ of an ensemble on a time grid.
    Formfactor(FormfactorArgs),
    /// A closed-form probe evaluated on ensemble-averaged form factors.
    Probe(ProbeArgs),
    /// Runs a verification suite and prints a JSON report.
    Verify(VerifyArgs),
    /// Fits TMI fluctuation-decay times against log d.
    FitDecay(FitDecayArgs),
    /// Samples one spectrum.
    Sample(SampleArgs),
}

/// Output format.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by the data-producing subcommands.
#[derive(Clone, Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write a gnuplot script next to `--out`.
    #[arg(long)]
    pub plot: bool,
}

/// Log-spaced time grid; `t = 0` is prepended.
#[derive(Clone, Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, default_value_t = 0.1)]
    pub tmin: f64,
    /// Defaults to `10·d`.
    #[arg(long)]
    pub tmax: Option<f64>,
}

#[derive(Clone, Debug, Args)]
pub struct FormfactorArgs {
    #[arg(long, default_value = "gue")]
    pub ensemble: String,
    #[arg(long, default_value_t = 4096)]
    pub d: usize,
    #[arg(long, default_value = "c2")]
    pub quantity: String,
    /// Adds Monte Carlo mean and standard error columns from this many spectra.
    #[arg(long)]
    pub mc: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Adds the smooth envelope column (Poisson and GUE, c2 and c4).
    #[arg(long)]
    pub envelope: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Scene parameters; cuts default to `√d` when `d` is a perfect square.
#[derive(Clone, Debug, Default, Args)]
pub struct SceneArgs {
    /// Dimension of subsystem A (entanglement, convergence, free energy).
    #[arg(long)]
    pub da: Option<usize>,
    /// Dimension of output subsystem C (TMI).
    #[arg(long)]
    pub dc: Option<usize>,
    /// Dimension of output subsystem D; must satisfy dC·dD = d.
    #[arg(long)]
    pub dd: Option<usize>,
    /// Purity of ψ_A.
    #[arg(long)]
    pub purity_a: Option<f64>,
    /// Purity of the dephased state.
    #[arg(long)]
    pub deph_purity: Option<f64>,
    /// Work-fluctuation parameter h = 4E₀E_HT/(tr H₀²/d − E_HT²).
    #[arg(long)]
    pub h: Option<f64>,
    /// ε = β(E₀ − tr H₀/d) for the free-energy bounds.
    #[arg(long)]
    pub beta_eps: Option<f64>,
}

#[derive(Clone, Debug, Args)]
pub struct ProbeArgs {
    /// One of: frame-potential, loschmidt1, loschmidt2, otoc2, otoc4, entanglement,
    /// tmi, coherence, convergence, work, work-fluct, work-fluct-large-d, free-energy-lower, free-energy-upper.
    pub probe: String,
    /// Comma-separated ensembles.
    #[arg(long, alias = "ensemble", default_value = "gue,gde,poisson", value_delimiter = ',')]
    pub ensembles: Vec<String>,
    #[arg(long, default_value_t = 4096)]
    pub d: usize,
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Weingarten,
    TwirlMc,
    FormfactorMc,
    ProbeOracle,
    Typicality,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("named").get_name())
    }
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Dimension; each suite has its own default.
    #[arg(long)]
    pub d: Option<usize>,
    /// Twirl order for `twirl-mc`.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Sample count; each suite has its own default.
    #[arg(long, alias = "mc")]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Comma-separated ensembles for `formfactor-mc` and `typicality`.
    #[arg(long, alias = "ensemble", value_delimiter = ',')]
    pub ensembles: Vec<String>,
    #[arg(long, default_value_t = 30)]
    pub points: usize,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct FitDecayArgs {
    #[arg(long, default_value = "gue")]
    pub ensemble: String,
    /// Comma-separated dimensions, at least four distinct values.
    #[arg(long, value_delimiter = ',', default_value = "256,1024,4096,16384,65536")]
    pub ds: Vec<usize>,
    /// Half-width of the band around the plateau, in bits.
    #[arg(long, default_value_t = 0.1)]
    pub band: f64,
    /// CSV with columns `d,t_fluct` to fit instead of measuring.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1500)]
    pub points: usize,
    #[arg(long, default_value_t = 0.1)]
    pub tmin: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct SampleArgs {
    #[arg(long, default_value = "gue")]
    pub ensemble: String,
    #[arg(long, default_value_t = 64)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verification(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Verification(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Verification(m) => write!(f, "verification failed: {m}"),
            Self::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<isotwirl::Error> for CliError {
    fn from(e: isotwirl::Error) -> Self {
        use isotwirl::Error as E;
        match e {
            E::Io(_) | E::Csv(_) | E::Json(_) => Self::Io(e.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Runs one parsed command.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Formfactor(a) => cmd::formfactor::run(&a),
        Command::Probe(a) => cmd::probe::run(&a),
        Command::Verify(a) => cmd::verify::run(&a),
        Command::FitDecay(a) => cmd::fit::run(&a),
        Command::Sample(a) => cmd::sample::run(&a),
    }
}
