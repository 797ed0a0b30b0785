//! `qnmlab`: spectra, sweeps, scattering scans, wavefunctions, time evolution,
//! platform maps and self-checks, written as CSV plus a JSON manifest.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Quasi-normal modes of an atom in front of a mirror.
#[derive(Debug, Parser)]
#[command(name = "qnmlab", version)]
struct Cli {
    /// Directory for CSV, JSON and manifest outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Refined quasi-normal modes.
    Spectrum(SpectrumArgs),
    /// Slowest-mode decay rate across level spacings.
    Sweep(SweepArgs),
    /// Phase shift, Wigner delay and enhancement over an energy window.
    Scatter(ScatterArgs),
    /// Spatial profile of one mode.
    Wavefunction(WavefunctionArgs),
    /// Time evolution of the excited atom.
    Evolve(EvolveArgs),
    /// Laboratory parameters to model parameters.
    #[command(subcommand)]
    Map(MapCommand),
    /// Cross-module self-checks.
    Verify(VerifyArgs),
}

/// System parameters, either dimensionless or physical.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ParamArgs {
    /// Dimensionless coupling kappa = 2 J^2 a / v_g^2.
    #[arg(long, required_unless_present = "coupling")]
    pub kappa: Option<f64>,
    /// Dimensionless level spacing W = Omega a / v_g.
    #[arg(long, required_unless_present = "omega")]
    pub w: Option<f64>,
    /// Dimensionless external loss Gamma a / v_g.
    #[arg(long, default_value_t = 0.0)]
    pub gamma_ext: f64,
    /// Physical coupling J (with --omega, --v-g, --distance).
    #[arg(long, conflicts_with_all = ["kappa", "w"], requires_all = ["omega", "v_g", "distance"])]
    pub coupling: Option<f64>,
    /// Physical level spacing Omega.
    #[arg(long, requires = "coupling")]
    pub omega: Option<f64>,
    /// Group velocity.
    #[arg(long, requires = "coupling")]
    pub v_g: Option<f64>,
    /// Atom-mirror distance.
    #[arg(long, requires = "coupling")]
    pub distance: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub j_min: i64,
    #[arg(long, default_value_t = 6, allow_negative_numbers = true)]
    pub j_max: i64,
    /// Newton stopping tolerance on |f|.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub w_min: f64,
    #[arg(long)]
    pub w_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.0)]
    pub gamma_ext: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ScatterArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub theta_min: f64,
    #[arg(long)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct WavefunctionArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Mode index.
    #[arg(long, allow_negative_numbers = true)]
    pub j: i64,
    #[arg(long, default_value_t = 5.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub t_max: f64,
    /// Time step; must divide the round trip 2.
    #[arg(long, default_value_t = qnmlab::dynamics::DEFAULT_DT)]
    pub dt: f64,
    #[arg(long, default_value_t = qnmlab::dynamics::DEFAULT_SAMPLE_INTERVAL)]
    pub sample_interval: f64,
    /// Start of the fit window (default: half of t_max).
    #[arg(long, requires = "fit_end")]
    pub fit_start: Option<f64>,
    #[arg(long, requires = "fit_start")]
    pub fit_end: Option<f64>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum MapCommand {
    /// dc-SQUID charge qubit on a transmission line.
    Squid(SquidArgs),
    /// Raman-driven Lambda atom.
    Raman(RamanArgs),
}

/// Bridge from platform frequencies to the dimensionless model.
#[derive(Debug, Args, Serialize)]
pub struct BridgeArgs {
    /// Inputs are ordinary frequencies; multiply by 2 pi.
    #[arg(long)]
    pub hz: bool,
    /// Group velocity, to report kappa and W.
    #[arg(long, requires = "distance")]
    pub v_g: Option<f64>,
    /// Atom-mirror distance, to report kappa and W.
    #[arg(long, requires = "v_g")]
    pub distance: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SquidArgs {
    /// Josephson energy (angular frequency, or Hz with --hz).
    #[arg(long)]
    pub josephson: f64,
    #[arg(long)]
    pub gate_capacitance: f64,
    #[arg(long)]
    pub junction_capacitance: f64,
    #[arg(long)]
    pub total_capacitance: f64,
    #[arg(long, conflicts_with = "gate_charge", required_unless_present = "gate_charge", allow_negative_numbers = true)]
    pub gate_voltage: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gate_charge: Option<f64>,
    /// External flux in units of the flux quantum.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub flux: f64,
    #[arg(long)]
    pub line_length: f64,
    #[arg(long)]
    pub line_capacitance: f64,
    /// Field mode frequency (angular, or Hz with --hz).
    #[arg(long)]
    pub mode_frequency: f64,
    /// Mixing angle in radians; defaults to atan2(B_x, B_z).
    #[arg(long, allow_negative_numbers = true)]
    pub mixing_angle: Option<f64>,
    /// Use hbar = e = 1 instead of SI.
    #[arg(long)]
    pub natural_units: bool,
    #[command(flatten)]
    pub bridge: BridgeArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct RamanArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub cavity_coupling: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub drive_coupling: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub detuning: f64,
    /// Atomic level spacing, needed to report kappa and W.
    #[arg(long)]
    pub level_spacing: Option<f64>,
    #[command(flatten)]
    pub bridge: BridgeArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Skip the long time-domain runs (default).
    #[arg(long, conflicts_with = "full")]
    pub quick: bool,
    /// Include the long time-domain runs.
    #[arg(long)]
    pub full: bool,
}

/// Exit codes: 0 success, 1 usage or input error, 2 partial result,
/// 3 verification failure.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verify(String),
}

impl From<qnmlab::Error> for Failure {
    fn from(e: qnmlab::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Complete,
    Partial,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("QNMLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("QNMLAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<Status, Failure> {
    configure_threads()?;
    let dir = cli.out_dir;
    match cli.command {
        Command::Spectrum(args) => commands::spectrum(&dir, args),
        Command::Sweep(args) => commands::sweep(&dir, args),
        Command::Scatter(args) => commands::scatter(&dir, args),
        Command::Wavefunction(args) => commands::wavefunction(&dir, args),
        Command::Evolve(args) => commands::evolve(&dir, args),
        Command::Map(args) => commands::map(&dir, args),
        Command::Verify(args) => commands::verify(&dir, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(2),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(3)
        }
    }
}
