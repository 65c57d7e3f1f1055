//! A-posteriori regularity certificate for a single initial condition.
//!
//! Given a numerical trajectory `v` (the piecewise-linear interpolant of
//! stored Galerkin states) the certificate compares
//!
//! ```text
//! lhs = ||D(v(0) - u0)|| + int_0^T* ||D r(s)|| ds,   r = dv/dt + A v + B(v, v)
//! rhs = c T*^{-1/4} exp(-c int_0^T* ||Dv||^4 + ||Dv|| ||Av|| ds)
//! ```
//!
//! and reports `certified` iff `lhs < rhs`. All integrals use composite
//! two-point Gauss quadrature on the stored intervals; the residual is
//! evaluated with the untruncated nonlinear term, so the part of
//! `B(v, v)` outside the Galerkin space is charged to the residual.
//! Quadrature error is estimated, not bounded.

use serde::{Deserialize, Serialize};

use crate::constants::ConstantsLedger;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::nonlinear::NonlinearEvaluator;
use crate::quadrature::GAUSS2;
use crate::solver::Trajectory;

pub const CERTIFICATE_SCHEMA: &str = "enstrophy-cert/certificate";
pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Inconclusive,
}

impl Verdict {
    fn from_sides(lhs: f64, rhs: f64) -> Self {
        if lhs < rhs {
            Verdict::Certified
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateMetadata {
    pub n_modes: usize,
    /// Largest stored interval of the trajectory.
    pub dt: f64,
    pub intervals: usize,
    pub quadrature: String,
    /// Polynomial degree integrated exactly by the rule.
    pub quadrature_degree: u32,
}

/// Threshold and verdict recomputed with the default `c` when the ledger
/// overrides it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefaultCCheck {
    pub c_const: f64,
    pub rhs: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub schema: String,
    pub version: u32,
    pub verdict: Verdict,
    pub lhs: f64,
    pub rhs: f64,
    /// `||D(v(0) - u0)||`.
    pub initial_gap: f64,
    /// `int ||D r||`.
    pub residual_integral: f64,
    /// `int ||Dv||^4 + ||Dv|| ||Av||`.
    pub integral_i: f64,
    pub t_star: f64,
    /// Gauss versus midpoint difference of the residual integral.
    pub quadrature_error_estimate: f64,
    pub metadata: CertificateMetadata,
    pub constants: ConstantsLedger,
    pub default_c: Option<DefaultCCheck>,
}

impl CertificateReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `c T*^{-1/4} exp(-c I)`.
pub fn robustness_threshold(c: f64, t_star: f64, integral_i: f64) -> f64 {
    c * t_star.powf(-0.25) * (-c * integral_i).exp()
}

/// Verification horizon `c^{1/2} ||u0||^2` after which every solution from
/// `u0` is regular.
pub fn t_star(u0: &SpectralField, ledger: &ConstantsLedger) -> f64 {
    ledger.c_const.sqrt() * u0.norms().energy
}

/// Small-data criterion `||Du0||^2 <= c^{-1/2} nu^2 lambda1^{1/2}`.
pub fn small_data_check(u0: &SpectralField, ledger: &ConstantsLedger) -> bool {
    u0.norms().enstrophy <= ledger.small_data_enstrophy()
}

/// Per-node quantities of the interpolant and its residual.
struct NodeValues {
    residual_v_norm: f64,
    dv: f64,
    av: f64,
}

/// Evaluates the interpolant's residual `dv/dt + Av + B(v, v)`.
struct ResidualEvaluator<'a> {
    traj: &'a Trajectory,
    lambdas: Vec<f64>,
    nonlinear: NonlinearEvaluator,
}

impl<'a> ResidualEvaluator<'a> {
    fn new(traj: &'a Trajectory) -> Self {
        Self {
            traj,
            lambdas: traj.space().eigenvalues().collect(),
            nonlinear: NonlinearEvaluator::new(),
        }
    }

    /// Residual on interval `j` at fraction `theta` of the stored interval.
    fn residual(&mut self, j: usize, theta: f64) -> (SpectralField, Vec<f64>) {
        let space = self.traj.space();
        let (a0, a1) = (&self.traj.states()[j], &self.traj.states()[j + 1]);
        let h = self.traj.times()[j + 1] - self.traj.times()[j];
        let v: Vec<f64> = a0.iter().zip(a1).map(|(x, y)| (1.0 - theta) * x + theta * y).collect();
        let linear: Vec<f64> = a0
            .iter()
            .zip(a1)
            .zip(&v)
            .zip(&self.lambdas)
            .map(|(((x, y), vi), l)| (y - x) / h + l * vi)
            .collect();
        let s = space.support();
        let vf = space.to_field(&v, s);
        let b = self.nonlinear.evaluate_full(&vf);
        let r = space.to_field(&linear, 2 * s).add_scaled(&b, 1.0);
        (r, v)
    }

    fn node(&mut self, j: usize, theta: f64) -> NodeValues {
        let (r, v) = self.residual(j, theta);
        let space = self.traj.space();
        NodeValues {
            residual_v_norm: r.norms().enstrophy.sqrt(),
            dv: space.enstrophy(&v).sqrt(),
            av: space.h2(&v).sqrt(),
        }
    }
}

/// Residual fields at the Gauss nodes of every stored interval, as
/// `(time, residual)` pairs.
pub fn residual_series(traj: &Trajectory) -> Result<Vec<(f64, SpectralField)>> {
    if traj.len() < 2 {
        return Err(Error::TrajectoryTooShort(
            "residual needs at least two stored times".into(),
        ));
    }
    let mut eval = ResidualEvaluator::new(traj);
    let mut out = Vec::with_capacity(2 * (traj.len() - 1));
    for j in 0..traj.len() - 1 {
        let (t0, t1) = (traj.times()[j], traj.times()[j + 1]);
        for (x, _) in GAUSS2 {
            out.push((t0 + x * (t1 - t0), eval.residual(j, x).0));
        }
    }
    Ok(out)
}

/// Evaluate the certificate inequality on `[0, t_star]`.
pub fn evaluate_certificate(
    u0: &SpectralField,
    traj: &Trajectory,
    t_star: f64,
    ledger: &ConstantsLedger,
) -> Result<CertificateReport> {
    ledger.validate()?;
    if !(t_star.is_finite() && t_star > 0.0) {
        return Err(Error::InvalidConfig(format!("T* must be positive, got {t_star}")));
    }
    if traj.len() < 2 {
        return Err(Error::TrajectoryTooShort(
            "certificate needs at least two stored times".into(),
        ));
    }
    if traj.end_time() < t_star * (1.0 - 1e-12) {
        return Err(Error::TrajectoryTooShort(format!(
            "trajectory ends at {} before T* = {t_star}",
            traj.end_time()
        )));
    }
    let initial_gap = u0.sub(&traj.field(0)).norms().enstrophy.sqrt();
    let mut eval = ResidualEvaluator::new(traj);
    let mut residual_integral = 0.0;
    let mut midpoint_integral = 0.0;
    let mut integral_i = 0.0;
    let mut intervals = 0;
    let mut dt_max: f64 = 0.0;
    for j in 0..traj.len() - 1 {
        let (t0, t1) = (traj.times()[j], traj.times()[j + 1]);
        if t0 >= t_star {
            break;
        }
        let h = t1 - t0;
        dt_max = dt_max.max(h);
        let seg = t1.min(t_star) - t0;
        let frac = seg / h;
        intervals += 1;
        for (x, w) in GAUSS2 {
            let n = eval.node(j, x * frac);
            residual_integral += w * seg * n.residual_v_norm;
            integral_i += w * seg * (n.dv.powi(4) + n.dv * n.av);
        }
        midpoint_integral += seg * eval.node(j, 0.5 * frac).residual_v_norm;
    }
    let lhs = initial_gap + residual_integral;
    let rhs = robustness_threshold(ledger.c_const, t_star, integral_i);
    for (name, value) in [("lhs", lhs), ("integral_i", integral_i)] {
        if !value.is_finite() {
            return Err(Error::ResolutionFailure(name));
        }
    }
    if rhs.is_nan() {
        return Err(Error::ResolutionFailure("rhs"));
    }
    let default_c = ledger.c_overridden().then(|| {
        let c = ConstantsLedger::default().c_const;
        let rhs = robustness_threshold(c, t_star, integral_i);
        DefaultCCheck {
            c_const: c,
            rhs,
            verdict: Verdict::from_sides(lhs, rhs),
        }
    });
    Ok(CertificateReport {
        schema: CERTIFICATE_SCHEMA.into(),
        version: CERTIFICATE_VERSION,
        verdict: Verdict::from_sides(lhs, rhs),
        lhs,
        rhs,
        initial_gap,
        residual_integral,
        integral_i,
        t_star,
        quadrature_error_estimate: (residual_integral - midpoint_integral).abs(),
        metadata: CertificateMetadata {
            n_modes: traj.space().dim(),
            dt: dt_max,
            intervals,
            quadrature: "gauss-legendre-2".into(),
            quadrature_degree: 3,
        },
        constants: *ledger,
        default_c,
    })
}

/// Checks the enstrophy inequality
/// `d/dt ||Du||^2 <= (c / nu^3) ||Du||^6 - nu lambda1 ||Du||^2` on every
/// stored interval, using difference quotients and the larger right-hand
/// side of the two endpoints. Diagnostic only.
pub fn enstrophy_ode_diagnostic(traj: &Trajectory, ledger: &ConstantsLedger) -> bool {
    let c = ledger.c_const;
    let nu = ledger.nu;
    let bound = |e: f64| c / nu.powi(3) * e.powi(3) - nu * ledger.lambda1 * e;
    (0..traj.len().saturating_sub(1)).all(|j| {
        let (e0, e1) = (traj.norms(j).enstrophy, traj.norms(j + 1).enstrophy);
        let h = traj.times()[j + 1] - traj.times()[j];
        let quotient = (e1 - e0) / h;
        let tol = 1e-6 * (1.0 + e0.max(e1).powi(3));
        quotient <= bound(e0).max(bound(e1)) + tol
    })
}
