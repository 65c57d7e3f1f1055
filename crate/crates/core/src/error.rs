use thiserror::Error;

/// Errors raised by the solver, certificate and covering machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("field is not conjugate-symmetric at wavevector {0:?}")]
    NotConjugateSymmetric([i32; 3]),
    #[error("field has a nonzero mean mode")]
    NonzeroMean,
    #[error("field is not divergence-free at wavevector {0:?}")]
    NotDivergenceFree([i32; 3]),
    #[error("wavevector {0:?} lies outside truncation radius {1}")]
    OutsideTruncation([i32; 3], usize),
    #[error("direct convolution is limited to truncation <= {max}, got {got}")]
    CostGuard { max: usize, got: usize },
    #[error("gevrey weight exponent {0} exceeds the overflow guard")]
    GevreyOutOfRange(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical divergence at t = {time}: enstrophy {enstrophy:e}")]
    Diverged { time: f64, enstrophy: f64 },
    #[error("time {t} outside trajectory range [0, {end}]")]
    TimeOutOfRange { t: f64, end: f64 },
    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),
    #[error("non-finite value in {0}; resolution is insufficient")]
    ResolutionFailure(&'static str),
    #[error("robustness radius underflows to zero (c I_S = {0:e})")]
    InfeasibleDelta(f64),
    #[error("lattice has more than {cap} points")]
    CountCapExceeded { cap: u64 },
    #[error("tail criterion lambda_(N+1) >= {0:e} needs more basis functions than a desk-scale campaign")]
    DimensionGuard(f64),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("malformed field file: {0}")]
    MalformedField(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("campaign halted after {completed} new points; resume from the checkpoint")]
    Halted { completed: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
