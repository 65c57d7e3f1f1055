//! Time integration of the Galerkin system
//! `du_n/dt + A u_n + P_n B(u_n, u_n) = 0`, `u_n(0) = P_n u_0`.
//!
//! The state is the coefficient vector of `u_n` in the real Stokes basis, so
//! every stored state is divergence-free by construction and the Stokes
//! operator is diagonal.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::GalerkinSpace;
use crate::error::{Error, Result};
use crate::field::{Norms, SpectralField};
use crate::nonlinear::NonlinearEvaluator;

/// Enstrophy above which integration aborts as numerically divergent.
pub const BLOWUP_ENSTROPHY: f64 = 1e12;

/// `dt * lambda_max` limits per scheme.
pub const IF_RK4_STABILITY: f64 = 1000.0;
pub const EXPLICIT_RK4_STABILITY: f64 = 2.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Lawson RK4: the Stokes term is integrated exactly by `exp(-lambda dt)`.
    IntegratingFactorRk4,
    ExplicitRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Galerkin dimension `n`.
    pub n_modes: usize,
    pub store_every: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, n_modes: usize) -> Self {
        Self {
            dt,
            scheme: Scheme::IntegratingFactorRk4,
            n_modes,
            store_every: 1,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_store_every(mut self, store_every: usize) -> Self {
        self.store_every = store_every;
        self
    }

    pub fn validate(&self, lambda_max: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_modes == 0 {
            return Err(Error::InvalidConfig("n_modes must be >= 1".into()));
        }
        if self.store_every == 0 {
            return Err(Error::InvalidConfig("store_every must be >= 1".into()));
        }
        let limit = match self.scheme {
            Scheme::IntegratingFactorRk4 => IF_RK4_STABILITY,
            Scheme::ExplicitRk4 => EXPLICIT_RK4_STABILITY,
        };
        if self.dt * lambda_max > limit {
            return Err(Error::InvalidConfig(format!(
                "dt * lambda_max = {} exceeds the {:?} stability limit {limit}",
                self.dt * lambda_max,
                self.scheme
            )));
        }
        Ok(())
    }
}

/// A time series of Galerkin states with its piecewise-linear interpolant.
#[derive(Debug, Clone)]
pub struct Trajectory {
    space: Arc<GalerkinSpace>,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(space: Arc<GalerkinSpace>, times: Vec<f64>, states: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::TrajectoryTooShort("no stored times".into()));
        }
        if times.len() != states.len() {
            return Err(Error::InvalidConfig(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig(
                "times must start at 0 and increase strictly".into(),
            ));
        }
        if states.iter().any(|s| s.len() != space.dim()) {
            return Err(Error::InvalidConfig("state dimension differs from the space".into()));
        }
        Ok(Self { space, times, states })
    }

    /// Build from stored fields, all expressed in the basis of the largest
    /// truncation among them.
    pub fn from_fields(times: Vec<f64>, fields: &[SpectralField]) -> Result<Self> {
        let trunc = fields.iter().map(|f| f.truncation()).max().unwrap_or(0);
        let space = Arc::new(GalerkinSpace::cube(trunc));
        let states = fields.iter().map(|f| space.coords(f)).collect();
        Self::new(space, times, states)
    }

    pub fn space(&self) -> &Arc<GalerkinSpace> {
        &self.space
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn field(&self, j: usize) -> SpectralField {
        self.space.field(&self.states[j])
    }

    pub fn norms(&self, j: usize) -> Norms {
        let a = &self.states[j];
        Norms {
            energy: self.space.energy(a),
            enstrophy: self.space.enstrophy(a),
            h2: self.space.h2(a),
        }
    }

    /// Coefficients of the linear interpolant at `t`.
    pub fn interpolant_coords(&self, t: f64) -> Result<Vec<f64>> {
        let end = self.end_time();
        if !(0.0..=end).contains(&t) {
            return Err(Error::TimeOutOfRange { t, end });
        }
        let j = self.times.partition_point(|&s| s <= t);
        if j == 0 || self.times[j - 1] == t {
            return Ok(self.states[j.saturating_sub(1)].clone());
        }
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let theta = (t - t0) / (t1 - t0);
        Ok(self.states[j - 1]
            .iter()
            .zip(&self.states[j])
            .map(|(a, b)| (1.0 - theta) * a + theta * b)
            .collect())
    }

    pub fn interpolant(&self, t: f64) -> Result<SpectralField> {
        Ok(self.space.field(&self.interpolant_coords(t)?))
    }

    /// CSV time series with header `t,energy,enstrophy,h2`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,energy,enstrophy,h2")?;
        for j in 0..self.len() {
            let n = self.norms(j);
            writeln!(out, "{:?},{:?},{:?},{:?}", self.times[j], n.energy, n.enstrophy, n.h2)?;
        }
        Ok(())
    }
}

/// Right-hand side pieces of the Galerkin system in basis coordinates.
pub struct GalerkinSystem {
    space: Arc<GalerkinSpace>,
    lambdas: Vec<f64>,
    evaluator: NonlinearEvaluator,
}

impl GalerkinSystem {
    pub fn new(space: Arc<GalerkinSpace>) -> Self {
        let lambdas = space.eigenvalues().collect();
        Self {
            space,
            lambdas,
            evaluator: NonlinearEvaluator::new(),
        }
    }

    pub fn space(&self) -> &Arc<GalerkinSpace> {
        &self.space
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambdas
    }

    /// `-P_n B(u, u)` in coordinates.
    pub fn nonlinear(&mut self, alpha: &[f64]) -> Vec<f64> {
        let s = self.space.support();
        let u = self.space.to_field(alpha, s);
        let b = self.evaluator.evaluate(&u, s);
        let mut out = self.space.coords(&b);
        out.iter_mut().for_each(|x| *x = -*x);
        out
    }

    /// Full right-hand side `-A u - P_n B(u, u)`.
    pub fn rhs(&mut self, alpha: &[f64]) -> Vec<f64> {
        let mut out = self.nonlinear(alpha);
        for ((o, l), a) in out.iter_mut().zip(&self.lambdas).zip(alpha) {
            *o -= l * a;
        }
        out
    }

    fn step_if_rk4(&mut self, y: &[f64], h: f64) -> Vec<f64> {
        let e_half: Vec<f64> = self.lambdas.iter().map(|l| (-l * h / 2.0).exp()).collect();
        let e_full: Vec<f64> = self.lambdas.iter().map(|l| (-l * h).exp()).collect();
        let n = y.len();
        let k1 = self.nonlinear(y);
        let y2: Vec<f64> = (0..n).map(|i| e_half[i] * (y[i] + 0.5 * h * k1[i])).collect();
        let k2 = self.nonlinear(&y2);
        let y3: Vec<f64> = (0..n).map(|i| e_half[i] * y[i] + 0.5 * h * k2[i]).collect();
        let k3 = self.nonlinear(&y3);
        let y4: Vec<f64> = (0..n).map(|i| e_full[i] * y[i] + h * e_half[i] * k3[i]).collect();
        let k4 = self.nonlinear(&y4);
        (0..n)
            .map(|i| e_full[i] * y[i] + h / 6.0 * (e_full[i] * k1[i] + 2.0 * e_half[i] * (k2[i] + k3[i]) + k4[i]))
            .collect()
    }

    fn step_rk4(&mut self, y: &[f64], h: f64) -> Vec<f64> {
        let n = y.len();
        let k1 = self.rhs(y);
        let y2: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k1[i]).collect();
        let k2 = self.rhs(&y2);
        let y3: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k2[i]).collect();
        let k3 = self.rhs(&y3);
        let y4: Vec<f64> = (0..n).map(|i| y[i] + h * k3[i]).collect();
        let k4 = self.rhs(&y4);
        (0..n)
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
            .collect()
    }

    pub fn step(&mut self, scheme: Scheme, y: &[f64], h: f64) -> Vec<f64> {
        match scheme {
            Scheme::IntegratingFactorRk4 => self.step_if_rk4(y, h),
            Scheme::ExplicitRk4 => self.step_rk4(y, h),
        }
    }
}

/// Step times `0 = t_0 < ... < t_m = T` with uniform `dt`, the last step
/// shortened so the final time is exactly `T`.
pub fn step_times(t_end: f64, dt: f64) -> Vec<f64> {
    let ratio = t_end / dt;
    let mut steps = ratio.ceil() as usize;
    if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        steps = ratio.round() as usize;
    }
    let steps = steps.max(1);
    let mut times: Vec<f64> = (0..steps).map(|j| j as f64 * dt).collect();
    times.push(t_end);
    times
}

/// Integrate the `n_modes`-dimensional Galerkin system from `P_n u0` to `t_end`.
pub fn integrate(u0: &SpectralField, t_end: f64, config: &IntegratorConfig) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "final time must be positive, got {t_end}"
        )));
    }
    let space = Arc::new(GalerkinSpace::first(config.n_modes));
    config.validate(space.max_eigenvalue())?;
    integrate_in(space, &space_coords(u0, config.n_modes), t_end, config)
}

fn space_coords(u0: &SpectralField, n: usize) -> Vec<f64> {
    GalerkinSpace::first(n).coords(u0)
}

/// Integrate from explicit coordinates in a given space.
pub fn integrate_in(
    space: Arc<GalerkinSpace>,
    alpha0: &[f64],
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate(space.max_eigenvalue())?;
    let grid = step_times(t_end, config.dt);
    let mut system = GalerkinSystem::new(space.clone());
    let mut y = alpha0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![y.clone()];
    let last = grid.len() - 1;
    for j in 1..=last {
        let h = grid[j] - grid[j - 1];
        y = system.step(config.scheme, &y, h);
        let e = space.enstrophy(&y);
        if !(e.is_finite() && e <= BLOWUP_ENSTROPHY) {
            return Err(Error::Diverged {
                time: grid[j],
                enstrophy: e,
            });
        }
        if j % config.store_every == 0 || j == last {
            times.push(grid[j]);
            states.push(y.clone());
        }
    }
    Trajectory::new(space, times, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson;
    use crate::sampling::random_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn step_grid_ends_exactly() {
        let t = step_times(1.0, 1e-3);
        assert_eq!(t.len(), 1001);
        assert_eq!(*t.last().unwrap(), 1.0);
        let t = step_times(1.0, 0.3);
        assert_eq!(t, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        assert_eq!(step_times(0.019, 0.5), vec![0.0, 0.019]);
    }

    #[test]
    fn shear_mode_decays_exponentially() {
        let u0 = SpectralField::shear(2, 1.0);
        let cfg = IntegratorConfig::new(1e-2, 36);
        let traj = integrate(&u0, 1.0, &cfg).unwrap();
        let err = traj
            .field(traj.len() - 1)
            .sub(&u0.scaled((-1f64).exp()))
            .norms()
            .enstrophy
            .sqrt();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn zero_stays_zero() {
        let traj = integrate(&SpectralField::zeros(2), 0.5, &IntegratorConfig::new(0.1, 52)).unwrap();
        assert!(traj.states().iter().all(|s| s.iter().all(|&a| a == 0.0)));
    }

    #[test]
    fn config_guards() {
        let u0 = SpectralField::shear(2, 1.0);
        assert!(integrate(&u0, 1.0, &IntegratorConfig::new(0.0, 12)).is_err());
        assert!(integrate(&u0, -1.0, &IntegratorConfig::new(0.1, 12)).is_err());
        assert!(integrate(&u0, 1.0, &IntegratorConfig::new(0.1, 0)).is_err());
        assert!(integrate(&u0, 1.0, &IntegratorConfig::new(0.1, 12).with_store_every(0)).is_err());
        // lambda_max = 4 for the first 64 functions
        let explicit = IntegratorConfig::new(0.8, 64).with_scheme(Scheme::ExplicitRk4);
        assert!(integrate(&u0, 1.0, &explicit).is_err());
        assert!(integrate(
            &u0,
            1.0,
            &IntegratorConfig::new(0.6, 64).with_scheme(Scheme::ExplicitRk4)
        )
        .is_ok());
        assert!(integrate(&u0, 1.0, &IntegratorConfig::new(300.0, 64)).is_err());
    }

    #[test]
    fn blowup_guard_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u0 = random_field(1, 1e9, &mut rng);
        let cfg = IntegratorConfig::new(0.2, 36).with_scheme(Scheme::ExplicitRk4);
        assert!(matches!(integrate(&u0, 10.0, &cfg), Err(Error::Diverged { .. })));
    }

    #[test]
    fn thinning_keeps_final_time() {
        let u0 = SpectralField::shear(1, 1.0);
        let traj = integrate(&u0, 1.0, &IntegratorConfig::new(0.1, 12).with_store_every(3)).unwrap();
        assert_eq!(traj.times().len(), 5);
        assert_eq!(traj.end_time(), 1.0);
    }

    #[test]
    fn interpolant_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u0 = random_field(1, 2.0, &mut rng);
        let traj = integrate(&u0, 0.3, &IntegratorConfig::new(0.1, 36)).unwrap();
        for j in 0..traj.len() {
            assert_eq!(traj.interpolant(traj.times()[j]).unwrap(), traj.field(j));
        }
        let mid = traj.interpolant_coords(0.15).unwrap();
        for ((m, a), b) in mid.iter().zip(&traj.states()[1]).zip(&traj.states()[2]) {
            assert!((m - 0.5 * (a + b)).abs() < 1e-15);
        }
        assert!(traj.interpolant(0.15).unwrap().max_divergence() < 1e-14);
        assert!(traj.interpolant(0.31).is_err());
        assert!(traj.interpolant(-1e-9).is_err());
    }

    #[test]
    fn energy_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u0 = random_field(2, 5.0, &mut rng);
        let traj = integrate(&u0, 1.0, &IntegratorConfig::new(1e-3, 64)).unwrap();
        let ens: Vec<f64> = (0..traj.len()).map(|j| traj.norms(j).enstrophy).collect();
        let dissipated = 2.0 * simpson(traj.times(), &ens);
        let e0 = traj.norms(0).energy;
        let e1 = traj.norms(traj.len() - 1).energy;
        assert!((e1 + dissipated - e0).abs() <= 1e-8 * e0);
    }
}
