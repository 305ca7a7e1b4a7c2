//! `qutrit`: design, simulate, benchmark, calibrate and analyze single-qutrit gates.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qutrit::error::ErrorClass;
use qutrit::{Error, Result};

#[derive(Parser)]
#[command(name = "qutrit", version, about = "Single-qutrit gate synthesis and benchmarking")]
struct Cli {
    /// Seed for every stochastic step; overrides seeds in config files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and sample the pulse schedule of a native gate.
    Design(DesignArgs),
    /// Propagate a schedule file and record level populations.
    Simulate(SimulateArgs),
    /// Enumerate the Clifford group and export its decompositions.
    Clifford(CliffordArgs),
    /// Randomized benchmarking.
    Rb(RbArgs),
    /// Interleaved randomized benchmarking of one native gate.
    Irb(IrbArgs),
    /// Qudit Ramsey populations versus phase.
    Ramsey(RamseyArgs),
    /// Base-d Kitaev phase estimation.
    Kitaev(KitaevArgs),
    /// Parity of a dihedral permutation from a single query.
    Parity(ParityArgs),
    /// Two-phase evolutionary calibration on a simulated transmon.
    Calibrate(CalibrateArgs),
    /// Fit coherence data or invert readout voltages.
    #[command(subcommand)]
    Fit(FitCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DesignGate {
    H,
    HInv,
    X,
    XInv,
    X02,
}

#[derive(Args)]
pub struct DesignArgs {
    #[arg(value_enum)]
    pub gate: DesignGate,
    /// Gate duration (ns).
    #[arg(long = "T", default_value_t = 35.0)]
    pub duration: f64,
    /// Sample spacing (ns).
    #[arg(long, default_value_t = 0.02)]
    pub dt: f64,
    /// Rise and fall time of the H envelope (ns).
    #[arg(long, default_value_t = 5.0)]
    pub edge: f64,
    /// Schedule JSON destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Schedule JSON written by `design`.
    pub schedule: PathBuf,
    /// Initial level.
    #[arg(long, default_value_t = 0)]
    pub init: usize,
    /// Integration step (ns); defaults to the schedule spacing.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Trajectory CSV destination; printed when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    ShortestWord,
    FewestPulses,
    MinimalSet,
}

#[derive(Args)]
pub struct CliffordArgs {
    #[arg(long, value_enum, default_value_t = ConventionArg::ShortestWord)]
    pub convention: ConventionArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct RbCommon {
    /// `ideal`, `depolarizing:<p>` or `pulse`.
    #[arg(long, default_value = "ideal")]
    pub noise: commands::NoiseArg,
    /// Comma-separated sequence lengths.
    #[arg(long, value_delimiter = ',', default_values_t = qutrit::rb::DEFAULT_LENGTHS)]
    pub lengths: Vec<usize>,
    #[arg(long, default_value_t = qutrit::rb::DEFAULT_SEQUENCES)]
    pub sequences: usize,
    /// Shots per sequence; 0 records exact survival.
    #[arg(long, default_value_t = qutrit::rb::DEFAULT_SHOTS)]
    pub shots: u32,
    /// Gate duration for pulse noise (ns).
    #[arg(long = "T", default_value_t = 35.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.02)]
    pub dt: f64,
    /// Fractional amplitude errors of the two tones for pulse noise.
    #[arg(long, default_value_t = 0.0)]
    pub eta1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta2: f64,
    /// Detuning errors in units of 2π/T for pulse noise.
    #[arg(long, default_value_t = 0.0)]
    pub zeta1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub zeta2: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::ShortestWord)]
    pub convention: ConventionArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RbArgs {
    #[command(flatten)]
    pub common: RbCommon,
}

#[derive(Args)]
pub struct IrbArgs {
    /// Interleaved gate: H, H_inv, X, X_inv, X01, X12 or X02.
    #[arg(long)]
    pub gate: String,
    /// Error of the interleaved gate under depolarizing noise.
    #[arg(long, default_value_t = 0.0)]
    pub gate_error: f64,
    #[command(flatten)]
    pub common: RbCommon,
}

#[derive(Args)]
pub struct RamseyArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Phase samples over one period.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct KitaevArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Number of base-d digits to estimate.
    #[arg(long, default_value_t = 3)]
    pub digits: usize,
    /// Phase to estimate (rad).
    #[arg(long, conflicts_with = "expansion", required_unless_present = "expansion")]
    pub phase: Option<f64>,
    /// Phase given by its base-d digits, most significant first (e.g. 1021).
    #[arg(long)]
    pub expansion: Option<String>,
    /// CSV of the estimate-error density.
    #[arg(long)]
    pub density: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ParityArgs {
    #[arg(long)]
    pub d: usize,
    /// Input basis state, coprime to d.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Permutation in one-line notation (e.g. 43210 or 4,3,2,1,0).
    #[arg(long)]
    pub perm: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// JSON config: optimizer, bounds, anharmonicity_mhz, duration, dt, initial.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Result JSON destination; printed when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fitness history CSV destination.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum FitCommand {
    /// Energy relaxation times from decay traces out of |1> and |2>.
    T1 {
        /// CSV columns: time, p0_from1, p1_from1, p2_from1, p0_from2, p1_from2, p2_from2 (time in µs).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stretched-exponential Ramsey fit.
    T2 {
        /// CSV columns: time, value (time in µs).
        #[arg(long)]
        input: PathBuf,
        /// Relaxation time of the baseline (µs).
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Populations from three readout voltages.
    Readout {
        /// JSON with the reference voltages `v` of each prepared state.
        #[arg(long)]
        calib: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        voltages: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("QUTRIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("QUTRIT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let seed = cli.seed;
    match cli.command {
        Command::Design(a) => commands::design(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Clifford(a) => commands::clifford(&a),
        Command::Rb(a) => commands::rb(&a, seed.unwrap_or(0)),
        Command::Irb(a) => commands::irb(&a, seed.unwrap_or(0)),
        Command::Ramsey(a) => commands::ramsey(&a),
        Command::Kitaev(a) => commands::kitaev(&a),
        Command::Parity(a) => commands::parity(&a),
        Command::Calibrate(a) => commands::calibrate(&a, seed),
        Command::Fit(f) => commands::fit(&f),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Io => 4,
            })
        }
    }
}
