//! Covering lattices of H^2 balls, the uniform robustness radius and the
//! Gevrey reduction from V balls to H^2 balls.
//!
//! A lattice point is `sum_{j<=N} (a_j / 2^M) w_j` with integer `a_j` and
//! `||A u|| <= S`. Two criteria make the lattice `delta`-dense in the V norm
//! over the ball:
//!
//! * tail: `lambda_{N+1} >= 4 S^2 / delta^2`, so `||D(v - P_N v)|| <= delta/2`;
//! * grid: `2^{-M} (sum_{j<=N} lambda_j)^{1/2} <= (sqrt 3 / 2) delta`.
//!
//! Rounding the coordinates of `P_N v` towards zero stays inside the ball and
//! moves each coordinate by less than `2^{-M}`; the in-span and tail errors
//! are V-orthogonal, so the total distance is at most
//! `(delta^2/4 + 3 delta^2/4)^{1/2} = delta`. The looser per-coordinate
//! rules `lambda_{N+1} >= 2 S^2 / delta` and `2^{-M} < delta / 2` are
//! reported alongside for comparison.

use serde::{Deserialize, Serialize};

use crate::basis::{self, GalerkinSpace};
use crate::constants::ConstantsLedger;
use crate::error::{Error, Result};
use crate::quadrature::trapezoid;
use crate::solver::Trajectory;

/// Default refusal threshold for lattice enumeration.
pub const DEFAULT_COUNT_CAP: u64 = 10_000_000;

const GRID_FACTOR: f64 = 0.866_025_403_784_438_6; // sqrt(3) / 2

/// Largest tail threshold `lambda_{N+1}` accepted; it corresponds to about
/// a million retained basis functions.
pub const MAX_TAIL_THRESHOLD: f64 = 2500.0;

/// Largest explicit lattice dimension accepted.
pub const MAX_LATTICE_DIMENSION: usize = 1 << 20;

/// Smallest `N` with `lambda_{N+1} >= 4 S^2 / delta^2`.
pub fn choose_n(s: f64, delta: f64) -> usize {
    basis::count_below(4.0 * s * s / (delta * delta))
}

/// Smallest `N` with `lambda_{N+1} >= 2 S^2 / delta`.
pub fn paper_choose_n(s: f64, delta: f64) -> usize {
    basis::count_below(2.0 * s * s / delta)
}

fn eigenvalue_sum(n: usize) -> f64 {
    basis::first(n).iter().map(|f| f.eigenvalue as f64).sum()
}

fn grid_holds(n: usize, m: usize, delta: f64) -> bool {
    n == 0 || (-(m as f64)).exp2() * eigenvalue_sum(n).sqrt() <= GRID_FACTOR * delta
}

/// Smallest `M` satisfying the grid criterion for the first `n` functions.
pub fn choose_m(n: usize, delta: f64) -> usize {
    if n == 0 {
        return 0;
    }
    let root = eigenvalue_sum(n).sqrt();
    (0..=1100)
        .find(|&m| (-(m as f64)).exp2() * root <= GRID_FACTOR * delta)
        .unwrap_or(1100)
}

/// Smallest `M` with `2^{-M} < delta / 2`.
pub fn paper_choose_m(delta: f64) -> usize {
    (0..=1100).find(|&m| (-(m as f64)).exp2() < delta / 2.0).unwrap_or(1100)
}

fn budget(m: usize, s: f64) -> u128 {
    (s * s * 4f64.powi(m as i32)).floor() as u128
}

fn lambda_sq(n: usize) -> Vec<u128> {
    basis::first(n).iter().map(|f| (f.eigenvalue as u128).pow(2)).collect()
}

/// Number of integer `a` in `Z^n` with `sum lambda_j^2 a_j^2 <= floor(S^2 4^M)`,
/// whether or not `(n, m)` covers anything. Stops once the count passes
/// `cap`.
pub fn count_lattice_points(n: usize, m: usize, s: f64, cap: u64) -> Result<u64> {
    if m > 60 {
        return Err(Error::InvalidConfig(format!("M = {m} exceeds 60")));
    }
    let budget = budget(m, s);
    // eigenvalues increase, so coordinates with lambda^2 > budget are zero
    let l2: Vec<u128> = lambda_sq(n).into_iter().take_while(|&x| x <= budget).collect();
    count_points(&l2, budget, cap).ok_or(Error::CountCapExceeded { cap })
}

/// Depth-first count over the nondecreasing weights `l2`, without recursion.
fn count_points(l2: &[u128], budget: u128, cap: u64) -> Option<u64> {
    struct Frame {
        rem: u128,
        a: u128,
        acc: u64,
    }
    let n = l2.len();
    if n == 0 {
        return Some(1);
    }
    let leaf = |j: usize, rem: u128| 2 * (rem / l2[j]).isqrt() as u64 + 1;
    if n == 1 {
        return Some(leaf(0, budget)).filter(|&c| c <= cap);
    }
    let mut stack = vec![Frame {
        rem: budget,
        a: 0,
        acc: 0,
    }];
    loop {
        let j = stack.len() - 1;
        let f = stack.last_mut().expect("non-empty");
        let finished = if f.a * f.a * l2[j] > f.rem {
            Some(f.acc)
        } else {
            let rem = f.rem - l2[j] * f.a * f.a;
            let sub = if j + 1 == n - 1 {
                Some(leaf(j + 1, rem))
            } else if l2[j + 1] > rem {
                Some(1)
            } else {
                None
            };
            match sub {
                Some(c) => {
                    f.acc += if f.a == 0 { c } else { 2 * c };
                    f.a += 1;
                    if f.acc > cap {
                        return None;
                    }
                }
                None => stack.push(Frame { rem, a: 0, acc: 0 }),
            }
            None
        };
        if let Some(total) = finished {
            stack.pop();
            match stack.last_mut() {
                None => return Some(total),
                Some(p) => {
                    p.acc += if p.a == 0 { total } else { 2 * total };
                    p.a += 1;
                    if p.acc > cap {
                        return None;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "S")]
    pub s: f64,
    pub delta: f64,
}

impl LatticeSpec {
    /// A lattice with explicit parameters; both covering criteria must hold.
    pub fn new(n: usize, m: usize, s: f64, delta: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite() && delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "S and delta must be positive, got {s}, {delta}"
            )));
        }
        if m > 60 {
            return Err(Error::InvalidConfig(format!("M = {m} exceeds 60")));
        }
        if n > MAX_LATTICE_DIMENSION {
            return Err(Error::InvalidConfig(format!("N = {n} exceeds {MAX_LATTICE_DIMENSION}")));
        }
        let spec = Self { n, m, s, delta };
        let next = basis::eigenvalue_of(n + 1) as f64;
        if next < 4.0 * s * s / (delta * delta) {
            return Err(Error::InvalidConfig(format!(
                "lambda_(N+1) = {next} below the tail requirement {}",
                4.0 * s * s / (delta * delta)
            )));
        }
        if !grid_holds(n, m, delta) {
            return Err(Error::InvalidConfig(format!(
                "M = {m} too coarse for N = {n}, delta = {delta}"
            )));
        }
        Ok(spec)
    }

    /// The minimal lattice from [`choose_n`] and [`choose_m`].
    pub fn from_rules(s: f64, delta: f64) -> Result<Self> {
        let n = choose_n(s, delta);
        Self::new(n, choose_m(n, delta), s, delta)
    }

    pub fn space(&self) -> GalerkinSpace {
        GalerkinSpace::first(self.n)
    }

    /// Number of lattice points, or [`Error::CountCapExceeded`] once the
    /// count passes `cap`.
    pub fn count(&self, cap: u64) -> Result<u64> {
        count_lattice_points(self.n, self.m, self.s, cap)
    }

    /// Lattice points as integer vectors `a`, in lexicographic order; the
    /// position in this order is the point's index.
    pub fn points(&self) -> LatticePoints {
        LatticePoints::new(lambda_sq(self.n), budget(self.m, self.s))
    }

    /// Coefficients `a_j / 2^M` of an integer point.
    pub fn coefficients(&self, a: &[i64]) -> Vec<f64> {
        let scale = (-(self.m as f64)).exp2();
        a.iter().map(|&x| x as f64 * scale).collect()
    }
}

/// Odometer over the integer points of `sum l2_j a_j^2 <= budget`.
#[derive(Debug, Clone)]
pub struct LatticePoints {
    l2: Vec<u128>,
    a: Vec<i64>,
    /// Budget left before coordinate `j`; `rem[n]` after the last one.
    rem: Vec<u128>,
    done: bool,
}

impl LatticePoints {
    fn new(l2: Vec<u128>, budget: u128) -> Self {
        let n = l2.len();
        let mut it = Self {
            l2,
            a: vec![0; n],
            rem: vec![0; n + 1],
            done: false,
        };
        it.rem[0] = budget;
        it.reset_from(0);
        it
    }

    fn top(&self, j: usize) -> i64 {
        (self.rem[j] / self.l2[j]).isqrt() as i64
    }

    fn set(&mut self, j: usize, value: i64) {
        self.a[j] = value;
        let v = value.unsigned_abs() as u128;
        self.rem[j + 1] = self.rem[j] - self.l2[j] * v * v;
    }

    fn reset_from(&mut self, j: usize) {
        for i in j..self.a.len() {
            let t = self.top(i);
            self.set(i, -t);
        }
    }
}

impl Iterator for LatticePoints {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        let out = self.a.clone();
        match (0..self.a.len()).rev().find(|&j| self.a[j] < self.top(j)) {
            Some(j) => {
                let v = self.a[j] + 1;
                self.set(j, v);
                self.reset_from(j + 1);
            }
            None => self.done = true,
        }
        Some(out)
    }
}

/// `c T*^{-1/4} exp(-c I_S)` with `I_S = T* D_S^4 + (T* D_S^2)^{1/2} E_S`.
pub fn delta_of_s(bounds: &UniformBounds, t_star: f64, ledger: &ConstantsLedger) -> Result<f64> {
    if !(t_star > 0.0 && t_star.is_finite()) {
        return Err(Error::InvalidConfig(format!("T* must be positive, got {t_star}")));
    }
    let (d, e) = (bounds.d_s, bounds.e_s);
    let i_s = t_star * d.powi(4) + (t_star * d * d).sqrt() * e;
    let delta = crate::certify::robustness_threshold(ledger.c_const, t_star, i_s);
    if delta > 0.0 && delta.is_finite() {
        Ok(delta)
    } else {
        Err(Error::InfeasibleDelta(ledger.c_const * i_s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Maxima over pilot trajectories times a safety factor; not a proof.
    Empirical,
    UserSupplied,
}

/// Bounds on `sup ||Du||` and `int ||Au||^2` over the trajectories of a ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformBounds {
    #[serde(rename = "D_S")]
    pub d_s: f64,
    #[serde(rename = "E_S")]
    pub e_s: f64,
    pub provenance: Provenance,
    pub safety_factor: f64,
}

impl UniformBounds {
    pub fn user_supplied(d_s: f64, e_s: f64) -> Result<Self> {
        if !(d_s >= 0.0 && e_s >= 0.0 && d_s.is_finite() && e_s.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bounds must be finite and >= 0, got {d_s}, {e_s}"
            )));
        }
        Ok(Self {
            d_s,
            e_s,
            provenance: Provenance::UserSupplied,
            safety_factor: 1.0,
        })
    }
}

/// Empirical bounds from pilot trajectories started in the ball of radius
/// `s`.
pub fn empirical_bounds(s: f64, trajectories: &[Trajectory], safety_factor: f64) -> Result<UniformBounds> {
    if trajectories.is_empty() {
        return Err(Error::EmptyInput("pilot trajectories"));
    }
    if !(safety_factor >= 1.0 && safety_factor.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "safety factor must be >= 1, got {safety_factor}"
        )));
    }
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for traj in trajectories {
        let norms: Vec<_> = (0..traj.len()).map(|j| traj.norms(j)).collect();
        if norms[0].h2.sqrt() > s * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "pilot initial condition has ||Au|| = {} outside the ball {s}",
                norms[0].h2.sqrt()
            )));
        }
        d = d.max(norms.iter().map(|n| n.enstrophy).fold(0.0, f64::max).sqrt());
        let h2: Vec<f64> = norms.iter().map(|n| n.h2).collect();
        e = e.max(trapezoid(traj.times(), &h2));
    }
    Ok(UniformBounds {
        d_s: safety_factor * d,
        e_s: safety_factor * e,
        provenance: Provenance::Empirical,
        safety_factor,
    })
}

/// Time `tau` after which a V ball of radius `R` lies in the H^2 ball of
/// radius `S`: `tau = (1 + R^2)^{-2} / K1`, `S = K1 (1 + R^2)^{5/2}`.
pub fn gevrey_reduction(r: f64, ledger: &ConstantsLedger) -> Result<(f64, f64)> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidConfig(format!("radius must be >= 0, got {r}")));
    }
    let q = 1.0 + r * r;
    Ok((1.0 / (ledger.k1 * q * q), ledger.k1 * q.powf(2.5)))
}

/// Whether `||A^{1/2} e^{t A^{1/2}} u(t)||^2 <= 2 (1 + ||Du0||^2)` at every
/// stored time `t <= 2 tau`.
pub fn gevrey_bound_check(traj: &Trajectory, tau: f64) -> Result<bool> {
    if traj.end_time() < 2.0 * tau * (1.0 - 1e-12) {
        return Err(Error::TrajectoryTooShort(format!(
            "trajectory ends at {} before 2 tau = {}",
            traj.end_time(),
            2.0 * tau
        )));
    }
    let bound = 2.0 * (1.0 + traj.norms(0).enstrophy);
    for (j, &t) in traj.times().iter().enumerate() {
        if t > 2.0 * tau * (1.0 + 1e-12) {
            break;
        }
        if traj.field(j).gevrey_norm(t)? > bound * (1.0 + 1e-12) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;
    use crate::solver::{integrate, step_times, IntegratorConfig};
    use std::f64::consts::PI;

    #[test]
    fn choose_rules_examples() {
        assert_eq!(choose_n(0.1, 0.2), 0);
        assert_eq!(choose_n(1e-9, 0.2), 0);
        assert_eq!(choose_m(0, 0.05), 0);
        assert_eq!(choose_m(1, 0.05), 5);
        assert_eq!(paper_choose_m(0.05), 6);
        // S = 1, delta = 0.1: first ordinal with |k|^2 >= 400
        let n = choose_n(1.0, 0.1);
        let fs = basis::enumerate_up_to(400);
        let first_at = fs.iter().position(|f| f.eigenvalue >= 400).unwrap();
        assert_eq!(n, first_at);
        assert_eq!(basis::eigenvalue_of(n + 1), 400);
        assert!(paper_choose_n(1.0, 0.1) < n);
    }

    #[test]
    fn chosen_specs_satisfy_invariants() {
        for (s, delta) in [(0.1, 0.2), (1.05, 2.05), (0.6, 1.0), (0.3, 0.05)] {
            let spec = LatticeSpec::from_rules(s, delta).unwrap();
            assert!(LatticeSpec::new(spec.n, spec.m, s, delta).is_ok());
            if spec.m > 0 {
                assert!(LatticeSpec::new(spec.n, spec.m - 1, s, delta).is_err());
            }
        }
        assert!(LatticeSpec::new(0, 0, 1.0, 0.2).is_err());
    }

    #[test]
    fn lattice_examples() {
        let zero = LatticeSpec::new(0, 0, 0.1, 0.2).unwrap();
        assert_eq!(zero.count(10).unwrap(), 1);
        assert_eq!(zero.points().collect::<Vec<_>>(), vec![Vec::<i64>::new()]);

        let one = LatticeSpec::new(1, 1, 1.0, 2.0).unwrap();
        let coeffs: Vec<f64> = one.points().map(|a| one.coefficients(&a)[0]).collect();
        assert_eq!(coeffs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);

        let two = LatticeSpec::new(2, 1, 1.0, 2.0).unwrap();
        assert_eq!(two.count(100).unwrap(), 13);
        assert_eq!(two.points().count(), 13);
    }

    #[test]
    fn count_guard() {
        let spec = LatticeSpec::new(12, 1, 1.05, 2.05).unwrap();
        assert_eq!(spec.count(DEFAULT_COUNT_CAP).unwrap(), 9993);
        assert!(matches!(spec.count(5000), Err(Error::CountCapExceeded { cap: 5000 })));
    }

    #[test]
    fn points_are_sorted_and_inside() {
        let spec = LatticeSpec::new(12, 2, 0.6, 1.0).unwrap();
        let pts: Vec<_> = spec.points().collect();
        assert_eq!(pts.len() as u64, spec.count(u64::MAX).unwrap());
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        let space = spec.space();
        for a in pts.iter().step_by(97) {
            assert!(space.h2(&spec.coefficients(a)).sqrt() <= spec.s * (1.0 + 1e-12));
        }
    }

    #[test]
    fn delta_examples() {
        let toy = ConstantsLedger::with_overrides(None, Some(1.0), None, None, None).unwrap();
        let b = UniformBounds::user_supplied(1.0, 1.0).unwrap();
        assert!((delta_of_s(&b, 1.0, &toy).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        let zero = UniformBounds::user_supplied(0.0, 0.0).unwrap();
        let ledger = ConstantsLedger::default();
        assert_eq!(delta_of_s(&zero, 1.0, &ledger).unwrap(), ledger.c_const);
        let b2 = UniformBounds::user_supplied(2.0, 1.0).unwrap();
        assert!(delta_of_s(&b2, 1.0, &toy).unwrap() < delta_of_s(&b, 1.0, &toy).unwrap());
        assert!(matches!(delta_of_s(&b, 1.0, &ledger), Err(Error::InfeasibleDelta(_))));
    }

    fn shear_trajectory(amp: f64) -> Trajectory {
        let u0 = SpectralField::shear(1, amp);
        let times = step_times(1.0, 1e-3);
        let fields: Vec<_> = times.iter().map(|t| u0.scaled((-t).exp())).collect();
        Trajectory::from_fields(times, &fields).unwrap()
    }

    #[test]
    fn empirical_bounds_examples() {
        let zero =
            Trajectory::from_fields(vec![0.0, 1.0], &[SpectralField::zeros(1), SpectralField::zeros(1)]).unwrap();
        let b = empirical_bounds(1.0, std::slice::from_ref(&zero), 2.0).unwrap();
        assert_eq!((b.d_s, b.e_s), (0.0, 0.0));
        assert_eq!(b.provenance, Provenance::Empirical);

        let s = (4.0 * PI.powi(3)).sqrt();
        let shear = shear_trajectory(1.0);
        let b = empirical_bounds(s, std::slice::from_ref(&shear), 2.0).unwrap();
        assert!((b.d_s - 2.0 * s).abs() < 1e-12 * s);
        let e = 2.0 * 4.0 * PI.powi(3) * (1.0 - (-2.0f64).exp()) / 2.0;
        assert!((b.e_s - e).abs() < 1e-5 * e);

        let more = empirical_bounds(s, &[zero, shear.clone()], 2.0).unwrap();
        assert!(more.d_s >= b.d_s && more.e_s >= b.e_s);
        assert!(empirical_bounds(s, &[], 2.0).is_err());
        assert!(empirical_bounds(1.0, &[shear], 2.0).is_err());
    }

    #[test]
    fn gevrey_reduction_values() {
        let ledger = ConstantsLedger::default();
        let (tau, s) = gevrey_reduction(0.0, &ledger).unwrap();
        assert!((tau - 3.062e-4).abs() < 1e-7);
        assert_eq!(s, 3266.0);
        let (tau1, s1) = gevrey_reduction(1.0, &ledger).unwrap();
        assert!((tau1 - 1.0 / (4.0 * 3266.0)).abs() < 1e-18);
        assert!((s1 - 3266.0 * 2f64.powf(2.5)).abs() < 1e-9 && (s1 - 18474.0).abs() < 2.0);
        let (tau2, s2) = gevrey_reduction(1.5, &ledger).unwrap();
        assert!(tau2 < tau1 && s2 > s1);
    }

    #[test]
    fn gevrey_check_cases() {
        let ledger = ConstantsLedger::default();
        let (tau, _) = gevrey_reduction(0.0, &ledger).unwrap();
        let zero =
            Trajectory::from_fields(vec![0.0, 1.0], &[SpectralField::zeros(1), SpectralField::zeros(1)]).unwrap();
        assert!(gevrey_bound_check(&zero, tau).unwrap());
        let u0 = SpectralField::shear(1, 1.0 / (4.0 * PI.powi(3)).sqrt());
        let traj = integrate(&u0, 2.0 * tau, &IntegratorConfig::new(1e-4, 12)).unwrap();
        assert!(gevrey_bound_check(&traj, tau).unwrap());
        let grow = Trajectory::from_fields(vec![0.0, 2.0 * tau], &[u0.clone(), u0.scaled(3.0)]).unwrap();
        assert!(!gevrey_bound_check(&grow, tau).unwrap());
        assert!(gevrey_bound_check(&grow, tau * 10.0).is_err());
    }
}
