//! Ball-verification campaigns: certify every point of a covering lattice,
//! in parallel, with a resumable JSON Lines checkpoint.
//!
//! The checkpoint's first line records the campaign inputs and the derived
//! setup (T*, bounds, delta, lattice); each further line is one finished
//! lattice point. Resuming re-reads both, drops a torn trailing line and
//! certifies only the missing points. Reports are ordered by lattice index,
//! so the final report does not depend on worker count or interruption.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::GalerkinSpace;
use crate::certify::{evaluate_certificate, Verdict};
use crate::constants::ConstantsLedger;
use crate::covering::{
    delta_of_s, empirical_bounds, gevrey_reduction, paper_choose_m, paper_choose_n, LatticePoints, LatticeSpec,
    UniformBounds, DEFAULT_COUNT_CAP, MAX_TAIL_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::sampling::random_on_h2_sphere;
use crate::solver::{integrate_in, IntegratorConfig, Scheme};

pub const REPORT_SCHEMA: &str = "enstrophy-cert/campaign";
pub const CHECKPOINT_SCHEMA: &str = "enstrophy-cert/checkpoint";
pub const SCHEMA_VERSION: u32 = 1;

pub const SMALL_DATA_REASON: &str = "small-data criterion";

/// Everything that determines a campaign's result. Two runs with equal
/// configs and radii produce identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Galerkin dimension used to integrate each lattice point.
    pub n_modes: usize,
    pub t_star_override: Option<f64>,
    /// Use each point's own `c^{1/2} ||u0||^2` instead of the ball's.
    pub per_point_t_star: bool,
    /// Certify points inside the small-data ball without integrating.
    pub small_data_fast_path: bool,
    pub constants: ConstantsLedger,
    pub count_cap: u64,
    pub safety_factor: f64,
    pub pilot_samples: usize,
    pub seed: u64,
    pub delta_override: Option<f64>,
    /// Explicit `(N, M)`; must satisfy both covering criteria.
    pub lattice_override: Option<(usize, usize)>,
}

impl CampaignConfig {
    pub fn new(dt: f64, n_modes: usize) -> Self {
        Self {
            dt,
            scheme: Scheme::IntegratingFactorRk4,
            n_modes,
            t_star_override: None,
            per_point_t_star: false,
            small_data_fast_path: true,
            constants: ConstantsLedger::default(),
            count_cap: DEFAULT_COUNT_CAP,
            safety_factor: 2.0,
            pilot_samples: 16,
            seed: 0,
            delta_override: None,
            lattice_override: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if self.constants.nu != 1.0 || self.constants.lambda1 != 1.0 {
            return Err(Error::InvalidConfig(
                "campaigns run on the non-dimensional problem (nu = lambda1 = 1)".into(),
            ));
        }
        if let Some(t) = self.t_star_override {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidConfig(format!("T* override must be positive, got {t}")));
            }
        }
        if let Some(d) = self.delta_override {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "delta override must be positive, got {d}"
                )));
            }
        }
        if self.pilot_samples == 0 && self.delta_override.is_none() {
            return Err(Error::InvalidConfig("pilot_samples must be >= 1".into()));
        }
        if self.count_cap == 0 {
            return Err(Error::InvalidConfig("count_cap must be >= 1".into()));
        }
        IntegratorConfig::new(self.dt, self.n_modes)
            .with_scheme(self.scheme)
            .validate(GalerkinSpace::first(self.n_modes).max_eigenvalue())
    }

    fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig::new(self.dt, self.n_modes).with_scheme(self.scheme)
    }
}

/// Execution options that do not affect results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Stop after this many newly certified points (testing hook).
    pub halt_after: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallSpace {
    H2,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Pending,
    Certified,
    Inconclusive,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: u64,
    /// Integer coordinates `a`; the point is `sum (a_j / 2^M) w_j`.
    pub a: Vec<i64>,
    pub status: PointStatus,
    pub reason: Option<String>,
    pub t_star: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSource {
    RobustnessRadius,
    UserOverride,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleParameters {
    /// `None` beyond desk scale.
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: usize,
}

/// The deterministic part of a campaign computed before any lattice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSetup {
    pub t_star: f64,
    pub bounds: Option<UniformBounds>,
    pub delta: f64,
    pub delta_source: DeltaSource,
    pub lattice: LatticeSpec,
    pub paper_rules: RuleParameters,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevreyStep {
    #[serde(rename = "R")]
    pub r: f64,
    pub tau: f64,
    #[serde(rename = "S")]
    pub s: f64,
    /// The reduction presumes every solution from the V ball is regular on
    /// `[0, tau]`; a certified H^2 ball is only conclusive under it.
    pub assumes_regularity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CampaignInputs {
    space: BallSpace,
    radius: f64,
    config: CampaignConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CheckpointHeader {
    schema: String,
    version: u32,
    inputs: CampaignInputs,
    setup: CampaignSetup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallVerdict {
    Certified,
    NotCertified,
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StatusSummary {
    pub certified: u64,
    pub inconclusive: u64,
    pub diverged: u64,
    pub pending: u64,
}

/// Full campaign state and report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignState {
    pub schema: String,
    pub version: u32,
    pub space: BallSpace,
    pub radius: f64,
    pub gevrey: Option<GevreyStep>,
    pub constants: ConstantsLedger,
    pub config: CampaignConfig,
    pub setup: CampaignSetup,
    pub verdict: BallVerdict,
    pub summary: StatusSummary,
    pub points: Vec<PointRecord>,
}

impl CampaignState {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn assemble(inputs: &CampaignInputs, setup: CampaignSetup, done: BTreeMap<u64, PointRecord>) -> Self {
        let mut summary = StatusSummary::default();
        let points: Vec<PointRecord> = setup
            .lattice
            .points()
            .enumerate()
            .map(|(i, a)| {
                done.get(&(i as u64)).cloned().unwrap_or(PointRecord {
                    index: i as u64,
                    a,
                    status: PointStatus::Pending,
                    reason: None,
                    t_star: None,
                    lhs: None,
                    rhs: None,
                })
            })
            .collect();
        for p in &points {
            match p.status {
                PointStatus::Pending => summary.pending += 1,
                PointStatus::Certified => summary.certified += 1,
                PointStatus::Inconclusive => summary.inconclusive += 1,
                PointStatus::Diverged => summary.diverged += 1,
            }
        }
        let verdict = if summary.pending > 0 {
            BallVerdict::Incomplete
        } else if summary.certified == points.len() as u64 {
            BallVerdict::Certified
        } else {
            BallVerdict::NotCertified
        };
        Self {
            schema: REPORT_SCHEMA.into(),
            version: SCHEMA_VERSION,
            space: inputs.space,
            radius: inputs.radius,
            gevrey: None,
            constants: inputs.config.constants,
            config: inputs.config.clone(),
            setup,
            verdict,
            summary,
            points,
        }
    }
}

/// Verification horizon of the H^2 ball of radius `s`: every point has
/// `||u0|| <= ||Au0|| <= s`, so `c^{1/2} s^2` bounds each point's T*.
pub fn ball_t_star(s: f64, ledger: &ConstantsLedger) -> f64 {
    ledger.c_const.sqrt() * s * s
}

fn parallel_map<T: Send, F: Fn(usize) -> T + Sync>(n: usize, workers: usize, f: F) -> Vec<T> {
    let next = Mutex::new(0usize);
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(n.max(1)) {
            scope.spawn(|| loop {
                let i = {
                    let mut g = next.lock().unwrap();
                    let i = *g;
                    *g += 1;
                    i
                };
                if i >= n {
                    break;
                }
                let r = f(i);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.unwrap()).collect()
}

/// Steps (1)-(4) of the ball procedure: T*, pilot bounds, delta and the
/// lattice.
fn compute_setup(radius: f64, config: &CampaignConfig, workers: usize) -> Result<CampaignSetup> {
    let ledger = &config.constants;
    let t_star = config.t_star_override.unwrap_or_else(|| ball_t_star(radius, ledger));
    let bounds = if config.pilot_samples > 0 {
        let space = Arc::new(GalerkinSpace::first(config.n_modes));
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let starts: Vec<Vec<f64>> = (0..config.pilot_samples)
            .map(|_| random_on_h2_sphere(&space, radius, &mut rng))
            .collect();
        // D_S is at least the largest initial V norm, so I_S >= T* D_S^4
        // decides infeasibility without integrating
        let d0 = starts.iter().map(|a| space.enstrophy(a)).fold(0.0, f64::max).sqrt();
        let floor = UniformBounds::user_supplied(config.safety_factor * d0, 0.0)?;
        if config.delta_override.is_none() {
            delta_of_s(&floor, t_star, ledger)?;
        }
        let integrator = config.integrator();
        let trajectories = parallel_map(starts.len(), workers, |i| {
            integrate_in(space.clone(), &starts[i], t_star, &integrator)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Some(empirical_bounds(radius, &trajectories, config.safety_factor)?)
    } else {
        None
    };
    let (delta, delta_source) = match (config.delta_override, bounds) {
        (Some(d), _) => (d, DeltaSource::UserOverride),
        (None, Some(b)) => (delta_of_s(&b, t_star, ledger)?, DeltaSource::RobustnessRadius),
        (None, None) => unreachable!("validated: pilots are required without a delta override"),
    };
    let tail = 4.0 * radius * radius / (delta * delta);
    if !(tail <= MAX_TAIL_THRESHOLD) {
        return Err(Error::DimensionGuard(tail));
    }
    let lattice = match config.lattice_override {
        Some((n, m)) => LatticeSpec::new(n, m, radius, delta)?,
        None => LatticeSpec::from_rules(radius, delta)?,
    };
    if lattice.n > config.n_modes {
        return Err(Error::InvalidConfig(format!(
            "Galerkin dimension {} is below the lattice dimension {}",
            config.n_modes, lattice.n
        )));
    }
    let count = lattice.count(config.count_cap)?;
    let paper_tail = 2.0 * radius * radius / delta;
    let paper_rules = RuleParameters {
        n: (paper_tail <= MAX_TAIL_THRESHOLD).then(|| paper_choose_n(radius, delta)),
        m: paper_choose_m(delta),
    };
    log::info!(
        "T* = {t_star:.6e}, delta = {delta:.6e}, N = {}, M = {}, {count} lattice points",
        lattice.n,
        lattice.m
    );
    Ok(CampaignSetup {
        t_star,
        bounds,
        delta,
        delta_source,
        lattice,
        paper_rules,
        count,
    })
}

/// Certify one lattice point.
fn certify_point(
    index: u64,
    a: Vec<i64>,
    setup: &CampaignSetup,
    config: &CampaignConfig,
    space: &Arc<GalerkinSpace>,
) -> PointRecord {
    let ledger = &config.constants;
    let mut alpha = setup.lattice.coefficients(&a);
    alpha.resize(space.dim(), 0.0);
    let mut record = PointRecord {
        index,
        a,
        status: PointStatus::Pending,
        reason: None,
        t_star: None,
        lhs: None,
        rhs: None,
    };
    if config.small_data_fast_path && space.enstrophy(&alpha) <= ledger.small_data_enstrophy() {
        record.status = PointStatus::Certified;
        record.reason = Some(SMALL_DATA_REASON.into());
        return record;
    }
    let t_star = if config.per_point_t_star {
        (ledger.c_const.sqrt() * space.energy(&alpha)).max(config.dt)
    } else {
        setup.t_star
    };
    record.t_star = Some(t_star);
    let outcome = integrate_in(space.clone(), &alpha, t_star, &config.integrator()).and_then(|traj| {
        let u0 = space.to_field(&alpha, space.support());
        evaluate_certificate(&u0, &traj, t_star, ledger)
    });
    match outcome {
        Ok(report) => {
            record.status = match report.verdict {
                Verdict::Certified => PointStatus::Certified,
                Verdict::Inconclusive => PointStatus::Inconclusive,
            };
            record.lhs = Some(report.lhs);
            record.rhs = Some(report.rhs);
        }
        Err(e) => {
            record.status = PointStatus::Diverged;
            record.reason = Some(e.to_string());
        }
    }
    record
}

struct Checkpoint {
    header: CheckpointHeader,
    records: BTreeMap<u64, PointRecord>,
    /// Length of the valid prefix of the file.
    valid_len: u64,
}

fn read_checkpoint(path: &PathBuf) -> Result<Option<Checkpoint>> {
    let mut text = String::new();
    match File::open(path) {
        Ok(mut f) => f.read_to_string(&mut text)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    // a torn final line is the only tolerated damage
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => return Ok(None),
    };
    let mut lines = complete.lines();
    let header: CheckpointHeader = lines
        .next()
        .map(serde_json::from_str)
        .transpose()
        .map_err(|e| Error::Checkpoint(format!("unreadable header: {e}")))?
        .ok_or_else(|| Error::Checkpoint("empty checkpoint".into()))?;
    if header.schema != CHECKPOINT_SCHEMA || header.version != SCHEMA_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint {} v{}",
            header.schema, header.version
        )));
    }
    let mut records = BTreeMap::new();
    for (n, line) in lines.enumerate() {
        let rec: PointRecord =
            serde_json::from_str(line).map_err(|e| Error::Checkpoint(format!("record {}: {e}", n + 1)))?;
        if rec.index >= header.setup.count {
            return Err(Error::Checkpoint(format!(
                "record index {} outside the lattice",
                rec.index
            )));
        }
        records.insert(rec.index, rec);
    }
    Ok(Some(Checkpoint {
        header,
        records,
        valid_len: complete.len() as u64,
    }))
}

fn run(inputs: CampaignInputs, options: &RunOptions) -> Result<CampaignState> {
    inputs.config.validate()?;
    if !(inputs.radius > 0.0 && inputs.radius.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "radius must be positive, got {}",
            inputs.radius
        )));
    }
    let workers = options.workers.max(1);
    let existing = match &options.checkpoint {
        Some(p) => read_checkpoint(p)?,
        None => None,
    };
    let (setup, mut done, mut writer) = match existing {
        Some(cp) => {
            if cp.header.inputs != inputs {
                return Err(Error::Checkpoint("checkpoint was written for different inputs".into()));
            }
            let path = options.checkpoint.as_ref().expect("checkpoint path");
            let file = OpenOptions::new().write(true).open(path)?;
            file.set_len(cp.valid_len)?;
            let mut file = BufWriter::new(file);
            std::io::Seek::seek(&mut file, std::io::SeekFrom::End(0))?;
            log::info!(
                "resuming: {} of {} points done",
                cp.records.len(),
                cp.header.setup.count
            );
            (cp.header.setup, cp.records, Some(file))
        }
        None => {
            let setup = compute_setup(inputs.radius, &inputs.config, workers)?;
            let writer = match &options.checkpoint {
                Some(p) => {
                    let mut w = BufWriter::new(File::create(p)?);
                    let header = CheckpointHeader {
                        schema: CHECKPOINT_SCHEMA.into(),
                        version: SCHEMA_VERSION,
                        inputs: inputs.clone(),
                        setup: setup.clone(),
                    };
                    writeln!(w, "{}", serde_json::to_string(&header)?)?;
                    w.flush()?;
                    Some(w)
                }
                None => None,
            };
            (setup, BTreeMap::new(), writer)
        }
    };

    let config = &inputs.config;
    let space = Arc::new(GalerkinSpace::first(config.n_modes));
    let queue: Mutex<std::iter::Enumerate<LatticePoints>> = Mutex::new(setup.lattice.points().enumerate());
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<PointRecord>();
    let mut written = 0u64;
    let mut write_error: Option<Error> = None;
    let fresh = std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (queue, stop, done, setup, space) = (&queue, &stop, &done, &setup, &space);
            scope.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let job = {
                    let mut q = queue.lock().unwrap();
                    q.by_ref().find(|(i, _)| !done.contains_key(&(*i as u64)))
                };
                let Some((i, a)) = job else { break };
                let record = certify_point(i as u64, a, setup, config, space);
                if tx.send(record).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // single writer: append each finished point, then fold it into the state
        let mut fresh = BTreeMap::new();
        for record in rx.iter() {
            if stop.load(Ordering::SeqCst) {
                continue;
            }
            if let Some(w) = writer.as_mut() {
                let line = serde_json::to_string(&record).map_err(Error::from);
                let res = line.and_then(|l| {
                    writeln!(w, "{l}")?;
                    w.flush()?;
                    Ok(())
                });
                if let Err(e) = res {
                    write_error = Some(e);
                    stop.store(true, Ordering::SeqCst);
                    continue;
                }
            }
            log::debug!("point {} -> {:?}", record.index, record.status);
            fresh.insert(record.index, record);
            written += 1;
            if options.halt_after.is_some_and(|h| written >= h) {
                stop.store(true, Ordering::SeqCst);
            }
        }
        fresh
    });
    done.extend(fresh);
    if let Some(e) = write_error {
        return Err(e);
    }
    if stop.load(Ordering::SeqCst) && (done.len() as u64) < setup.count {
        return Err(Error::Halted { completed: written });
    }
    Ok(CampaignState::assemble(&inputs, setup, done))
}

/// Verify the H^2 ball `||Au0|| <= radius`.
pub fn verify_ball_h2(radius: f64, config: &CampaignConfig, options: &RunOptions) -> Result<CampaignState> {
    run(
        CampaignInputs {
            space: BallSpace::H2,
            radius,
            config: config.clone(),
        },
        options,
    )
}

/// Verify the V ball `||Du0|| <= radius` through the H^2 ball it enters
/// after time `tau`. Conclusive only if solutions from the V ball are
/// regular up to `tau`, which the report flags.
pub fn verify_ball_v(radius: f64, config: &CampaignConfig, options: &RunOptions) -> Result<CampaignState> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidConfig(format!("radius must be positive, got {radius}")));
    }
    let (tau, s) = gevrey_reduction(radius, &config.constants)?;
    let mut state = run(
        CampaignInputs {
            space: BallSpace::V,
            radius: s,
            config: config.clone(),
        },
        options,
    )?;
    state.radius = radius;
    state.gevrey = Some(GevreyStep {
        r: radius,
        tau,
        s,
        assumes_regularity: true,
    });
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(c: f64) -> CampaignConfig {
        let mut cfg = CampaignConfig::new(1e-2, 36);
        cfg.constants = ConstantsLedger::with_overrides(None, Some(c), None, None, None).unwrap();
        cfg.pilot_samples = 2;
        cfg
    }

    #[test]
    fn toy_ball_is_a_single_point() {
        let cfg = toy(1.0);
        let state = verify_ball_h2(0.1, &cfg, &RunOptions::default()).unwrap();
        assert_eq!(state.setup.lattice.n, 0);
        assert_eq!(state.setup.count, 1);
        assert!(state.setup.delta >= 0.2);
        assert_eq!(state.verdict, BallVerdict::Certified);
        assert_eq!(state.points[0].reason.as_deref(), Some(SMALL_DATA_REASON));
        assert_eq!(
            state.setup.bounds.unwrap().provenance,
            crate::covering::Provenance::Empirical
        );
    }

    #[test]
    fn explicit_lattice_with_certificates() {
        let mut cfg = toy(1.0);
        cfg.delta_override = Some(2.0);
        cfg.lattice_override = Some((2, 1));
        cfg.small_data_fast_path = false;
        cfg.t_star_override = Some(0.2);
        let opts = RunOptions {
            workers: 3,
            ..Default::default()
        };
        let state = verify_ball_h2(1.0, &cfg, &opts).unwrap();
        assert_eq!(state.setup.count, 13);
        assert_eq!(state.setup.delta_source, DeltaSource::UserOverride);
        assert_eq!(state.summary.certified, 13);
        assert!(state.points.iter().all(|p| p.lhs.is_some()));
        let again = verify_ball_h2(1.0, &cfg, &RunOptions { workers: 1, ..opts }).unwrap();
        assert_eq!(again.to_json().unwrap(), state.to_json().unwrap());
    }

    #[test]
    fn halted_campaign_resumes_to_the_same_report() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.jsonl");
        let mut cfg = toy(1.0);
        cfg.delta_override = Some(2.0);
        cfg.lattice_override = Some((2, 1));
        cfg.small_data_fast_path = false;
        cfg.t_star_override = Some(0.1);
        let reference = verify_ball_h2(
            1.0,
            &cfg,
            &RunOptions {
                workers: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let opts = RunOptions {
            workers: 2,
            checkpoint: Some(path.clone()),
            halt_after: Some(5),
        };
        assert!(matches!(
            verify_ball_h2(1.0, &cfg, &opts),
            Err(Error::Halted { completed: 5 })
        ));
        // tear the last record as a kill mid-write would
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() - 7]).unwrap();
        let resume = RunOptions {
            halt_after: None,
            ..opts.clone()
        };
        let state = verify_ball_h2(1.0, &cfg, &resume).unwrap();
        assert_eq!(state.to_json().unwrap(), reference.to_json().unwrap());
        // nothing left to do: same again
        let replay = verify_ball_h2(1.0, &cfg, &resume).unwrap();
        assert_eq!(replay, state);
        // inputs must match
        let mut other = cfg.clone();
        other.dt = 5e-3;
        assert!(matches!(
            verify_ball_h2(1.0, &other, &resume),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn corrupted_middle_record_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.jsonl");
        let cfg = toy(1.0);
        let opts = RunOptions {
            workers: 1,
            checkpoint: Some(path.clone()),
            halt_after: None,
        };
        verify_ball_h2(0.1, &cfg, &opts).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{not json}\n");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(verify_ball_h2(0.1, &cfg, &opts), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn default_constants_are_infeasible_at_desk_radii() {
        let mut cfg = CampaignConfig::new(1e-2, 12);
        cfg.pilot_samples = 2;
        assert!(matches!(
            verify_ball_h2(1.0, &cfg, &RunOptions::default()),
            Err(Error::InfeasibleDelta(_))
        ));
    }

    #[test]
    fn count_cap_is_enforced() {
        let mut cfg = toy(1.0);
        cfg.delta_override = Some(2.05);
        cfg.lattice_override = Some((12, 1));
        cfg.count_cap = 1000;
        assert!(matches!(
            verify_ball_h2(1.05, &cfg, &RunOptions::default()),
            Err(Error::CountCapExceeded { cap: 1000 })
        ));
    }

    #[test]
    fn v_ball_reports_the_reduction() {
        let mut cfg = toy(1.0);
        cfg.constants.k1 = 1e-3;
        let state = verify_ball_v(0.5, &cfg, &RunOptions::default()).unwrap();
        let g = state.gevrey.clone().unwrap();
        let (tau, s) = gevrey_reduction(0.5, &cfg.constants).unwrap();
        assert_eq!((g.tau, g.s), (tau, s));
        assert!(g.assumes_regularity);
        assert_eq!(state.radius, 0.5);
        assert_eq!(state.setup.lattice.s, s);
        assert_eq!(state.setup.count, 1);
        assert_eq!(state.verdict, BallVerdict::Certified);
    }

    #[test]
    fn rejects_dimensional_ledgers() {
        let mut cfg = toy(1.0);
        cfg.constants.nu = 0.5;
        assert!(matches!(
            verify_ball_h2(0.1, &cfg, &RunOptions::default()),
            Err(Error::InvalidConfig(_))
        ));
    }
}
