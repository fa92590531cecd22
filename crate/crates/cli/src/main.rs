//! `creutz`: spectra, phase maps, degeneracy reports and wave-packet runs for
//! the non-Hermitian Creutz ladder.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use creutz_core::model::Boundary;
use creutz_core::sweep::BoundarySet;
use creutz_core::Error;

/// Exit status for bad flags or parameters.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for solver and propagation failures.
pub const EXIT_NUMERICAL: u8 = 3;
/// Exit status for unreadable or unwritable files.
pub const EXIT_IO: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "creutz", version, about = "Non-Hermitian Creutz ladder toolkit")]
pub struct Cli {
    /// key=value file using the long flag names; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for grid sweeps. Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Eigenvalues under open and/or periodic boundaries.
    Spectrum(SpectrumArgs),
    /// Spectral density M over a (t0, gbar) grid.
    Phase(PhaseArgs),
    /// Mean directional IPR of the open-boundary eigenstates over a grid.
    Dipr(GridArgs),
    /// Final modified IPR of a centred wave packet over a grid.
    Mipr(MiprArgs),
    /// Degeneracy label, gauge report and spectral class of one point, as JSON.
    Classify(ClassifyArgs),
    /// Time evolution of a localized wave packet.
    Evolve(EvolveArgs),
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    #[arg(long, default_value_t = 1.0)]
    pub tbar: f64,
    #[arg(long)]
    pub t0: f64,
    #[arg(long)]
    pub gbar: f64,
    #[arg(long)]
    pub g0: f64,
    /// Half-difference of the leg hoppings.
    #[arg(long, default_value_t = 0.0)]
    pub dt: f64,
    /// Half-difference of the leg non-reciprocities.
    #[arg(long, default_value_t = 0.0)]
    pub dgamma: f64,
    /// Number of unit cells.
    #[arg(long = "L", default_value_t = 50)]
    pub cells: usize,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Seed for randomized utilities; recorded in the header.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// obc, pbc or both.
    #[arg(long, default_value = "obc")]
    pub boundary: BoundarySet,
    /// Add lipr, ripr and dipr of each eigenvector (single boundary only).
    #[arg(long)]
    pub dipr: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long)]
    pub g0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tbar: f64,
    #[arg(long = "L", default_value_t = 50)]
    pub cells: usize,
    /// Nodes along t0 and gbar, `NxM`.
    #[arg(long, default_value = "201x201")]
    pub grid: GridSize,
    /// Range `a:b` for both axes.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<Span>,
    #[arg(long = "t0-range", allow_hyphen_values = true)]
    pub t0_range: Option<Span>,
    #[arg(long = "gbar-range", allow_hyphen_values = true)]
    pub gbar_range: Option<Span>,
    /// Move the nearest grid lines onto +-g0 and +-tbar.
    #[arg(long)]
    pub snap_special: bool,
    /// Relative tolerance of the degeneracy labels.
    #[arg(long, default_value_t = creutz_core::degeneracy::DEFAULT_CLASS_TOL)]
    pub class_tol: f64,
    /// Relative tolerance of the real/imaginary spectral classes.
    #[arg(long, default_value_t = creutz_core::spectral::DEFAULT_TOL_REL)]
    pub tol_rel: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "both")]
    pub boundary: BoundarySet,
}

#[derive(Args, Debug, Clone)]
pub struct MiprArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = creutz_core::sweep::DEFAULT_T_MAX)]
    pub t_max: f64,
    #[arg(long, default_value_t = creutz_core::sweep::DEFAULT_STEPS)]
    pub steps: usize,
}

#[derive(Args, Debug, Clone)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Boundary used for the spectral class.
    #[arg(long, default_value = "obc")]
    pub boundary: Boundary,
    #[arg(long, default_value_t = creutz_core::degeneracy::DEFAULT_CLASS_TOL)]
    pub class_tol: f64,
    #[arg(long, default_value_t = creutz_core::spectral::DEFAULT_TOL_REL)]
    pub tol_rel: f64,
    /// Absolute eigenvalue cutoff; defaults to 1e-9 times the infinity norm.
    #[arg(long)]
    pub tol_abs: Option<f64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Auto,
    Expm,
    Eigen,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverflowArg {
    Renormalize,
    Error,
}

#[derive(Args, Debug, Clone)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value = "obc")]
    pub boundary: Boundary,
    #[arg(long, default_value_t = creutz_core::sweep::DEFAULT_T_MAX)]
    pub t_max: f64,
    #[arg(long, default_value_t = creutz_core::sweep::DEFAULT_STEPS)]
    pub steps: usize,
    /// Initial cell, 1-based; defaults to ceil(L/2).
    #[arg(long)]
    pub cell: Option<usize>,
    /// Amplitude `re,im` on sublattice a.
    #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
    pub weight_a: Cplx,
    /// Amplitude `re,im` on sublattice b.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
    pub weight_b: Cplx,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// `error` fails once the norm passes 1e300 instead of renormalizing.
    #[arg(long, value_enum, default_value_t = OverflowArg::Renormalize)]
    pub overflow: OverflowArg,
    /// Cells whose intensity exceeds this fraction of the peak count as support.
    #[arg(long, default_value_t = creutz_core::dynamics::DEFAULT_SUPPORT_FRACTION)]
    pub support_fraction: f64,
    /// Also write `t,norm,log_norm,mipr,max_support` per time step.
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
    /// Check the trace against an independent route and exit 3 on mismatch.
    #[arg(long)]
    pub self_check: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

/// `NxM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSize(pub usize, pub usize);

impl FromStr for GridSize {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(['x', 'X']).ok_or("expected NxM")?;
        let n = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x}: {e}"));
        Ok(GridSize(n(a)?, n(b)?))
    }
}

impl std::fmt::Display for GridSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

/// `a:b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span(pub f64, pub f64);

impl FromStr for Span {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or("expected a:b")?;
        let n = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}"));
        Ok(Span(n(a)?, n(b)?))
    }
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}:{:?}", self.0, self.1)
    }
}

/// `re,im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cplx(pub f64, pub f64);

impl FromStr for Cplx {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').unwrap_or((s, "0"));
        let n = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}"));
        Ok(Cplx(n(a)?, n(b)?))
    }
}

impl std::fmt::Display for Cplx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?},{:?}", self.0, self.1)
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERICAL, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameters(_)
            | Error::ImbalancedParameters { .. }
            | Error::OddSize(_)
            | Error::OutOfRange(_)
            | Error::WrongClass { .. }
            | Error::ZeroState
            | Error::DimensionMismatch { .. }
            | Error::TooLarge { .. } => EXIT_USAGE,
            Error::Io(_) => EXIT_IO,
            _ => EXIT_NUMERICAL,
        };
        Self { code, message: e.to_string() }
    }
}

pub fn command() -> clap::Command {
    Cli::command()
        .args_override_self(true)
        .mut_subcommands(|s| s.allow_negative_numbers(true).args_override_self(true))
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match command()
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    }
    let result = match cli.cmd {
        Cmd::Spectrum(a) => commands::spectrum(&a),
        Cmd::Phase(a) => commands::phase(&a),
        Cmd::Dipr(a) => commands::dipr(&a),
        Cmd::Mipr(a) => commands::mipr(&a),
        Cmd::Classify(a) => commands::classify(&a),
        Cmd::Evolve(a) => commands::evolve(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
