use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use enstrophy_cert::campaign::{verify_ball_h2, verify_ball_v, BallVerdict, CampaignConfig, RunOptions};
use enstrophy_cert::certify::{evaluate_certificate, small_data_check, t_star, CertificateReport, Verdict};
use enstrophy_cert::covering::{
    choose_m, choose_n, count_lattice_points, paper_choose_m, paper_choose_n, LatticeSpec, MAX_TAIL_THRESHOLD,
};
use enstrophy_cert::sampling::seeded_random_field;
use enstrophy_cert::{integrate, IntegratorConfig, SpectralField};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{exit, CliError};

pub const SERIES_HEADER: &str = "t,energy,enstrophy,h2,gevrey";
pub const SERIES_VERSION: &str = "# enstrophy-cert series v1";

fn read_field(path: &Path) -> Result<SpectralField, CliError> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(SpectralField::read_text(BufReader::new(file))?)
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = output(out)?;
    writeln!(w, "{}", serde_json::to_string_pretty(value)?)?;
    w.flush()?;
    Ok(())
}

fn integrator(cfg: &RunConfig) -> IntegratorConfig {
    IntegratorConfig::new(cfg.dt, cfg.n_modes).with_scheme(cfg.scheme)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum HorizonSource {
    /// `c^{1/2} ||u0||^2`.
    Energy,
    Override,
    /// The energy horizon was shorter than one step.
    StepFloor,
}

#[derive(Debug, Serialize)]
struct CertifyOneOutput {
    schema: &'static str,
    version: u32,
    t_star_source: HorizonSource,
    small_data: bool,
    resolution: usize,
    certificate: CertificateReport,
}

pub fn certify_one(cfg: &RunConfig, field: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let u0 = read_field(field)?;
    let (horizon, source) = match cfg.t_star_override {
        Some(t) => (t, HorizonSource::Override),
        None => {
            let t = t_star(&u0, &cfg.constants);
            if t >= cfg.dt {
                (t, HorizonSource::Energy)
            } else {
                (cfg.dt, HorizonSource::StepFloor)
            }
        }
    };
    let traj = integrate(&u0, horizon, &integrator(cfg))?;
    let report = evaluate_certificate(&u0, &traj, horizon, &cfg.constants)?;
    let code = match report.verdict {
        Verdict::Certified => exit::CERTIFIED,
        Verdict::Inconclusive => exit::INCONCLUSIVE,
    };
    eprintln!(
        "{:?}: lhs = {:e}, rhs = {:e}, T* = {:e}",
        report.verdict, report.lhs, report.rhs, report.t_star
    );
    write_json(
        out,
        &CertifyOneOutput {
            schema: "enstrophy-cert/certify-one",
            version: 1,
            t_star_source: source,
            small_data: small_data_check(&u0, &cfg.constants),
            resolution: cfg.resolution,
            certificate: report,
        },
    )?;
    Ok(code)
}

pub struct BallArgs {
    pub v_ball: bool,
    pub radius: f64,
    pub delta: Option<f64>,
    pub lattice: Option<(usize, usize)>,
    pub fast_path: bool,
    pub per_point_tstar: bool,
    pub halt_after: Option<u64>,
}

pub fn verify_ball(cfg: &RunConfig, args: BallArgs, out: Option<&Path>) -> Result<u8, CliError> {
    let mut campaign = CampaignConfig::new(cfg.dt, cfg.n_modes);
    campaign.scheme = cfg.scheme;
    campaign.t_star_override = cfg.t_star_override;
    campaign.per_point_t_star = args.per_point_tstar;
    campaign.small_data_fast_path = args.fast_path;
    campaign.constants = cfg.constants;
    campaign.count_cap = cfg.count_cap;
    campaign.safety_factor = cfg.safety_factor;
    campaign.pilot_samples = cfg.pilot_samples;
    campaign.seed = cfg.seed;
    campaign.delta_override = args.delta;
    campaign.lattice_override = args.lattice;
    let options = RunOptions {
        workers: cfg.workers,
        checkpoint: cfg.checkpoint.clone(),
        halt_after: args.halt_after,
    };
    let state = if args.v_ball {
        verify_ball_v(args.radius, &campaign, &options)?
    } else {
        verify_ball_h2(args.radius, &campaign, &options)?
    };
    let s = &state.summary;
    eprintln!(
        "{:?}: {} points ({} certified, {} inconclusive, {} diverged), delta = {:e}",
        state.verdict, state.setup.count, s.certified, s.inconclusive, s.diverged, state.setup.delta
    );
    write_json(out, &state)?;
    Ok(match state.verdict {
        BallVerdict::Certified => exit::CERTIFIED,
        _ if s.diverged > 0 => exit::DIVERGED,
        _ => exit::INCONCLUSIVE,
    })
}

#[derive(Debug, Serialize)]
struct RuleReport {
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "M")]
    m: usize,
    /// `None` when beyond the count cap or desk scale.
    count: Option<u64>,
}

#[derive(Debug, Serialize)]
struct LatticeInfo {
    schema: &'static str,
    version: u32,
    #[serde(rename = "S")]
    s: f64,
    delta: f64,
    count_cap: u64,
    safe: RuleReport,
    paper: RuleReport,
    selected: Option<RuleReport>,
}

fn rule_report(n: Option<usize>, m: usize, s: f64, cap: u64) -> RuleReport {
    RuleReport {
        n,
        m,
        count: n.and_then(|n| count_lattice_points(n, m, s, cap).ok()),
    }
}

pub fn lattice_info(cfg: &RunConfig, s: f64, delta: f64, lattice: Option<(usize, usize)>) -> Result<u8, CliError> {
    if !(s > 0.0 && s.is_finite() && delta > 0.0 && delta.is_finite()) {
        return Err(CliError::Usage(format!(
            "radius and delta must be positive, got {s}, {delta}"
        )));
    }
    let cap = cfg.count_cap;
    let safe_n = (4.0 * s * s / (delta * delta) <= MAX_TAIL_THRESHOLD).then(|| choose_n(s, delta));
    let paper_n = (2.0 * s * s / delta <= MAX_TAIL_THRESHOLD).then(|| paper_choose_n(s, delta));
    let selected = match lattice {
        Some((n, m)) => {
            let spec = LatticeSpec::new(n, m, s, delta)?;
            Some(rule_report(Some(spec.n), spec.m, s, cap))
        }
        None => None,
    };
    let info = LatticeInfo {
        schema: "enstrophy-cert/lattice-info",
        version: 1,
        s,
        delta,
        count_cap: cap,
        safe: rule_report(safe_n, safe_n.map_or(0, |n| choose_m(n, delta)), s, cap),
        paper: rule_report(paper_n, paper_choose_m(delta), s, cap),
        selected,
    };
    write_json(None, &info)?;
    Ok(exit::CERTIFIED)
}

pub fn emit_series(cfg: &RunConfig, field: &Path, t_end: f64, out: Option<&Path>) -> Result<u8, CliError> {
    let u0 = read_field(field)?;
    let traj = integrate(&u0, t_end, &integrator(cfg))?;
    let mut w = output(out)?;
    writeln!(w, "{SERIES_VERSION}")?;
    writeln!(w, "{SERIES_HEADER}")?;
    for (j, &t) in traj.times().iter().enumerate() {
        let n = traj.norms(j);
        let g = traj.field(j).gevrey_norm(t)?;
        writeln!(w, "{t:e},{:e},{:e},{:e},{g:e}", n.energy, n.enstrophy, n.h2)?;
    }
    w.flush()?;
    Ok(exit::CERTIFIED)
}

#[derive(Debug, Clone, Copy)]
pub enum FieldKind {
    Zero,
    Shear,
    Random,
}

pub fn make_field(cfg: &RunConfig, kind: FieldKind, enstrophy: f64, out: Option<&Path>) -> Result<u8, CliError> {
    if !(enstrophy >= 0.0 && enstrophy.is_finite()) {
        return Err(CliError::Usage(format!("enstrophy must be >= 0, got {enstrophy}")));
    }
    let k = cfg.resolution;
    let field = match kind {
        FieldKind::Zero => SpectralField::zeros(k),
        // (sin x3, 0, 0) has enstrophy 4 pi^3
        FieldKind::Shear => SpectralField::shear(k, (enstrophy / (4.0 * PI.powi(3))).sqrt()),
        FieldKind::Random => seeded_random_field(k, enstrophy, cfg.seed),
    };
    let mut w = output(out)?;
    field.write_text(&mut w)?;
    w.flush()?;
    Ok(exit::CERTIFIED)
}
