mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use enstrophy_cert::Error;

use crate::config::{CommonArgs, RunConfig};

/// Exit codes are a stable contract.
pub mod exit {
    pub const CERTIFIED: u8 = 0;
    pub const INCONCLUSIVE: u8 = 2;
    pub const DIVERGED: u8 = 3;
    pub const INFEASIBLE_DELTA: u8 = 4;
    pub const COUNT_CAP: u8 = 5;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const IO: u8 = 74;
    pub const INTERRUPTED: u8 = 75;
    pub const FAILURE: u8 = 1;
}

#[derive(Debug, Parser)]
#[command(
    name = "enstrophy-cert",
    version,
    about = "Numerical regularity certificates for 3D Navier-Stokes on the torus"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Space {
    H2,
    V,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FieldKind {
    Zero,
    Shear,
    Random,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify a single initial condition.
    CertifyOne {
        field: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify every initial condition in an H^2 or V ball.
    VerifyBall {
        #[arg(value_enum)]
        space: Space,
        radius: f64,
        /// Covering radius instead of the robustness radius from pilot bounds.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long = "lattice-n", requires = "lattice_m")]
        lattice_n: Option<usize>,
        #[arg(long = "lattice-m", requires = "lattice_n")]
        lattice_m: Option<usize>,
        /// Integrate small-data points instead of certifying them outright.
        #[arg(long = "no-fast-path")]
        no_fast_path: bool,
        /// Use each point's own T* instead of the ball's.
        #[arg(long = "per-point-tstar")]
        per_point_tstar: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "halt-after", hide = true)]
        halt_after: Option<u64>,
    },
    /// Lattice parameters and size for a ball, without integrating.
    LatticeInfo {
        radius: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "lattice-n", requires = "lattice_m")]
        lattice_n: Option<usize>,
        #[arg(long = "lattice-m", requires = "lattice_n")]
        lattice_m: Option<usize>,
    },
    /// Norm time series of the Galerkin solution as CSV.
    EmitSeries {
        field: PathBuf,
        t_end: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a field file.
    MakeField {
        #[arg(value_enum)]
        kind: FieldKind,
        /// Target enstrophy (shear and random fields).
        #[arg(long, default_value_t = 1e-6)]
        enstrophy: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn is_broken_pipe(&self) -> bool {
        match self {
            CliError::Io(e) | CliError::Core(Error::Io(e)) => e.kind() == std::io::ErrorKind::BrokenPipe,
            _ => false,
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io(_) => exit::IO,
            CliError::Core(e) => match e {
                Error::Diverged { .. } | Error::ResolutionFailure(_) | Error::GevreyOutOfRange(_) => exit::DIVERGED,
                Error::InfeasibleDelta(_) => exit::INFEASIBLE_DELTA,
                Error::CountCapExceeded { .. } | Error::DimensionGuard(_) => exit::COUNT_CAP,
                Error::Halted { .. } => exit::INTERRUPTED,
                Error::Checkpoint(_) => exit::DATA,
                Error::Io(_) => exit::IO,
                Error::MalformedField(_)
                | Error::InvalidConfig(_)
                | Error::OutsideTruncation(..)
                | Error::NotConjugateSymmetric(_)
                | Error::NotDivergenceFree(_)
                | Error::NonzeroMean
                | Error::TrajectoryTooShort(_)
                | Error::CostGuard { .. } => exit::USAGE,
                _ => exit::FAILURE,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let cfg = RunConfig::resolve(&cli.common).map_err(CliError::Usage)?;
    match cli.command {
        Command::CertifyOne { field, out } => commands::certify_one(&cfg, &field, out.as_deref()),
        Command::VerifyBall {
            space,
            radius,
            delta,
            lattice_n,
            lattice_m,
            no_fast_path,
            per_point_tstar,
            out,
            halt_after,
        } => commands::verify_ball(
            &cfg,
            commands::BallArgs {
                v_ball: matches!(space, Space::V),
                radius,
                delta,
                lattice: lattice_n.zip(lattice_m),
                fast_path: !no_fast_path,
                per_point_tstar,
                halt_after,
            },
            out.as_deref(),
        ),
        Command::LatticeInfo {
            radius,
            delta,
            lattice_n,
            lattice_m,
        } => commands::lattice_info(&cfg, radius, delta, lattice_n.zip(lattice_m)),
        Command::EmitSeries { field, t_end, out } => commands::emit_series(&cfg, &field, t_end, out.as_deref()),
        Command::MakeField { kind, enstrophy, out } => {
            let kind = match kind {
                FieldKind::Zero => commands::FieldKind::Zero,
                FieldKind::Shear => commands::FieldKind::Shear,
                FieldKind::Random => commands::FieldKind::Random,
            };
            commands::make_field(&cfg, kind, enstrophy, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        // a closed pipe downstream (e.g. `| head`) is not an error
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
