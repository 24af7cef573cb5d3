//! `mesofringe` — fringe visibility and thermal decoherence of hot
//! mesoscopic particles, from the command line.
//!
//! Exit codes: 0 success, 2 usage, 3 numerical failure, 4 verification
//! failure. Stable for CI.

mod commands;
mod config;
mod manifest;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
    pub fn numeric(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into() }
    }
    pub fn verification(message: impl Into<String>) -> Self {
        CliError { code: 4, message: message.into() }
    }
    pub fn io(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<mesofringe::Error> for CliError {
    fn from(e: mesofringe::Error) -> Self {
        match e {
            mesofringe::Error::InvalidParameter(_) => CliError::usage(e.to_string()),
            _ => CliError::numeric(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "mesofringe",
    version,
    about = "Double-slit visibility and decoherence of hot mesoscopic particles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form visibility report for one configuration
    Visibility(VisibilityArgs),
    /// Sweep visibility or the decoherence temperature over a 2-D grid (CSV)
    Surface(SurfaceArgs),
    /// Monte Carlo estimates vs the closed form, with pull statistics
    McVerify(McVerifyArgs),
    /// Emission spectrum CSV and the total rate by both routes
    Spectrum(SpectrumArgs),
    /// Screen intensity pattern, analytic and/or Monte Carlo (CSV)
    Intensity(IntensityArgs),
    /// Re-run the canonical argv recorded in a manifest
    Replay(ReplayArgs),
}

/// Flags shared by every computing subcommand.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Flat key = value config file, merged under explicit flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Cap worker threads for parallel sections
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Molecule selection: a preset name, or the four explicit parameters.
#[derive(Args, Debug, Clone)]
pub struct MoleculeArgs {
    /// Molecule preset (C60, C70)
    #[arg(long)]
    pub molecule: Option<String>,
    /// Label for an explicitly-parameterized molecule
    #[arg(long)]
    pub mol_name: Option<String>,
    /// Number of vibrational modes N
    #[arg(long)]
    pub n_modes: Option<f64>,
    /// Cross-section power-law exponent
    #[arg(long)]
    pub ell: Option<u32>,
    /// Cross-section coefficient a_ell (m^2 s^ell)
    #[arg(long)]
    pub a_ell: Option<f64>,
    /// Mass (kg)
    #[arg(long)]
    pub mass: Option<f64>,
}

#[derive(Args, Debug)]
pub struct VisibilityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub molecule: MoleculeArgs,
    /// Internal temperature (K; suffix K allowed)
    #[arg(long = "T")]
    pub temperature: Option<String>,
    /// Slit separation (m; suffixes nm/um/mm allowed)
    #[arg(long = "d")]
    pub separation: Option<String>,
    /// Flight time (s; suffixes ns/us/ms allowed)
    #[arg(long = "t")]
    pub time: Option<String>,
    /// Slit width (m); sets the envelope momentum scale sigma_p = hbar/(2 width)
    #[arg(long)]
    pub slit_width: Option<String>,
    /// Relative quadrature tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also write the full record as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub molecule: MoleculeArgs,
    /// What to sweep: visibility or tdec
    #[arg(long)]
    pub quantity: Option<String>,
    /// Grid axis, name:min:max:count[:log]; give exactly two
    #[arg(long = "grid")]
    pub grids: Vec<String>,
    /// Fixed temperature for grids not sweeping T
    #[arg(long = "T")]
    pub temperature: Option<String>,
    /// Fixed slit separation for grids not sweeping d
    #[arg(long = "d")]
    pub separation: Option<String>,
    /// Fixed flight time for grids not sweeping t
    #[arg(long = "t")]
    pub time: Option<String>,
    /// Visibility level defining the decoherence temperature
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Solve bracket lo:hi in K for tdec
    #[arg(long)]
    pub bracket: Option<String>,
    /// Bisection temperature tolerance (K)
    #[arg(long)]
    pub tol_t: Option<f64>,
    /// Relative quadrature tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Keep going on node failures, writing `nan` cells
    #[arg(long)]
    pub allow_partial: bool,
    /// Output CSV path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct McVerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub molecule: MoleculeArgs,
    /// Trajectories per point (statistical floor: 1000)
    #[arg(long)]
    pub n: Option<u64>,
    /// Root seed; batch b draws from the derived child stream (seed, b)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trajectories per batch (the reduction tree is over batches)
    #[arg(long)]
    pub batch_size: Option<u64>,
    /// Comparison point T,d,t (repeatable; default: a 12-point grid)
    #[arg(long = "point")]
    pub points: Vec<String>,
    /// Write the comparison table as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Dump sampled trajectories to this path (one per line: n t1 dp1 ...)
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Number of trajectories to dump
    #[arg(long)]
    pub dump_count: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub molecule: MoleculeArgs,
    /// Internal temperature (K)
    #[arg(long = "T")]
    pub temperature: Option<String>,
    /// Frequency grid min:max:count[:log] (rad/s)
    #[arg(long)]
    pub omega: Option<String>,
    /// Output CSV path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IntensityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub molecule: MoleculeArgs,
    /// Internal temperature (K)
    #[arg(long = "T")]
    pub temperature: Option<String>,
    /// Slit separation (m)
    #[arg(long = "d")]
    pub separation: Option<String>,
    /// Flight time (s)
    #[arg(long = "t")]
    pub time: Option<String>,
    /// Slit width (m); envelope scale
    #[arg(long)]
    pub slit_width: Option<String>,
    /// exact, mc, or both
    #[arg(long)]
    pub mode: Option<String>,
    /// Screen grid min:max:count (m)
    #[arg(long, allow_hyphen_values = true)]
    pub screen: Option<String>,
    /// Monte Carlo trajectories (mc/both modes)
    #[arg(long)]
    pub n: Option<u64>,
    /// Root seed for the Monte Carlo pattern
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    /// Path to a `<output>.manifest.json` written by a previous run
    pub manifest: PathBuf,
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Visibility(args) => commands::run_visibility(args),
        Command::Surface(args) => commands::run_surface(args),
        Command::McVerify(args) => commands::run_mc_verify(args),
        Command::Spectrum(args) => commands::run_spectrum(args),
        Command::Intensity(args) => commands::run_intensity(args),
        Command::Replay(args) => {
            let manifest = manifest::RunManifest::load(&args.manifest)?;
            let mut argv = vec!["mesofringe".to_string()];
            argv.extend(manifest.argv.clone());
            let cli = Cli::try_parse_from(&argv)
                .map_err(|e| CliError::usage(format!("manifest argv does not parse: {e}")))?;
            if matches!(cli.command, Command::Replay(_)) {
                return Err(CliError::usage("manifest argv must not itself be a replay"));
            }
            dispatch(cli.command)
        }
    }
}

/// Run `f` inside a rayon pool of the requested size; `None` keeps the
/// default pool. Results are bit-identical either way.
pub fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            if n == 0 {
                return Err(CliError::usage("--threads must be at least 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::io(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
