//! Run configuration: TOML file, environment fallback and flag overrides.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use enstrophy_cert::covering::DEFAULT_COUNT_CAP;
use enstrophy_cert::{ConstantsLedger, GalerkinSpace, Scheme};
use serde::Deserialize;

pub const CONFIG_ENV: &str = "ENSTROPHY_CERT_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    IfRk4,
    Rk4,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::IfRk4 => Scheme::IntegratingFactorRk4,
            SchemeArg::Rk4 => Scheme::ExplicitRk4,
        }
    }
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration (falls back to $ENSTROPHY_CERT_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Spectral resolution K; the default Galerkin space is |k| <= K.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Time step (default 1e-3).
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Galerkin dimension n (overrides the resolution-derived default).
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    /// Verification horizon T* instead of the one derived from the data.
    #[arg(long, global = true)]
    pub tstar: Option<f64>,
    /// Time integrator (default if-rk4).
    #[arg(long, global = true, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Override the constant c of the small-data and robustness bounds.
    #[arg(long = "const-c", global = true)]
    pub const_c: Option<f64>,
    /// Override the Gevrey constant K1.
    #[arg(long = "const-k1", global = true)]
    pub const_k1: Option<f64>,
    /// Campaign worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// JSON Lines checkpoint; an existing one is resumed.
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
    /// Multiplier on pilot-estimated bounds (default 2).
    #[arg(long = "safety-factor", global = true)]
    pub safety_factor: Option<f64>,
    /// Refuse lattices with more points (default 1e7).
    #[arg(long = "count-cap", global = true)]
    pub count_cap: Option<u64>,
    /// Pilot trajectories for empirical bounds (default 16).
    #[arg(long = "pilot-samples", global = true)]
    pub pilot_samples: Option<usize>,
    /// Seed for pilot samples and random fields.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsFile {
    k: Option<f64>,
    c: Option<f64>,
    #[serde(rename = "K1")]
    k1: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    resolution: Option<usize>,
    n_modes: Option<usize>,
    dt: Option<f64>,
    t_star: Option<f64>,
    scheme: Option<Scheme>,
    workers: Option<usize>,
    checkpoint: Option<PathBuf>,
    count_cap: Option<u64>,
    safety_factor: Option<f64>,
    pilot_samples: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    constants: ConstantsFile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub resolution: usize,
    pub n_modes: usize,
    pub dt: f64,
    pub scheme: Scheme,
    pub t_star_override: Option<f64>,
    pub constants: ConstantsLedger,
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    pub count_cap: u64,
    pub safety_factor: f64,
    pub pilot_samples: usize,
    pub seed: u64,
}

fn read_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, String> {
        let path = args
            .config
            .clone()
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let file = match path {
            Some(p) => read_file(&p)?,
            None => FileConfig::default(),
        };
        let resolution = args.resolution.or(file.resolution).unwrap_or(8);
        if resolution == 0 {
            return Err("resolution must be >= 1".into());
        }
        let n_modes = args
            .modes
            .or(file.n_modes)
            .unwrap_or_else(|| GalerkinSpace::ball(resolution).dim());
        let constants = ConstantsLedger::with_overrides(
            file.constants.k,
            args.const_c.or(file.constants.c),
            args.const_k1.or(file.constants.k1),
            None,
            None,
        )
        .map_err(|e| e.to_string())?;
        let workers = args
            .workers
            .or(file.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let config = Self {
            resolution,
            n_modes,
            dt: args.dt.or(file.dt).unwrap_or(1e-3),
            scheme: args
                .scheme
                .map(Scheme::from)
                .or(file.scheme)
                .unwrap_or(Scheme::IntegratingFactorRk4),
            t_star_override: args.tstar.or(file.t_star),
            constants,
            workers,
            checkpoint: args.checkpoint.clone().or(file.checkpoint),
            count_cap: args.count_cap.or(file.count_cap).unwrap_or(DEFAULT_COUNT_CAP),
            safety_factor: args.safety_factor.or(file.safety_factor).unwrap_or(2.0),
            pilot_samples: args.pilot_samples.or(file.pilot_samples).unwrap_or(16),
            seed: args.seed.or(file.seed).unwrap_or(0),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        positive("dt", self.dt)?;
        if let Some(t) = self.t_star_override {
            positive("tstar", t)?;
        }
        if self.n_modes == 0 || self.workers == 0 || self.count_cap == 0 || self.pilot_samples == 0 {
            return Err("modes, workers, count-cap and pilot-samples must be >= 1".into());
        }
        if !(self.safety_factor >= 1.0 && self.safety_factor.is_finite()) {
            return Err(format!("safety-factor must be >= 1, got {}", self.safety_factor));
        }
        Ok(())
    }
}
