//! Solver checks against oracles written independently of the crate.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use enstrophy_cert::basis::project_n;
use enstrophy_cert::quadrature::simpson;
use enstrophy_cert::sampling::random_field;
use enstrophy_cert::{integrate, ConstantsLedger, GalerkinSpace, IntegratorConfig, SpectralField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Modes = BTreeMap<[i32; 3], [Complex64; 3]>;

const VOLUME: f64 = 8.0 * PI * PI * PI;

fn to_modes(u: &SpectralField, max_norm_sq: i32) -> Modes {
    u.iter()
        .filter(|(k, _)| {
            let n = k.0.iter().map(|c| c * c).sum::<i32>();
            n > 0 && n <= max_norm_sq
        })
        .map(|(k, v)| (k.0, *v))
        .collect()
}

/// `-|k|^2 u_k - P[(u.grad)u]_k` for every retained `k`, by direct summation.
fn galerkin_rhs(u: &Modes) -> Modes {
    let i = Complex64::new(0.0, 1.0);
    let mut out = Modes::new();
    for (&k, uk) in u {
        let mut conv = [Complex64::new(0.0, 0.0); 3];
        for (p, up) in u {
            let q = [k[0] - p[0], k[1] - p[1], k[2] - p[2]];
            if let Some(uq) = u.get(&q) {
                let adv = i * (up[0] * q[0] as f64 + up[1] * q[1] as f64 + up[2] * q[2] as f64);
                for d in 0..3 {
                    conv[d] += adv * uq[d];
                }
            }
        }
        let kk = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        let kdot = conv[0] * k[0] as f64 + conv[1] * k[1] as f64 + conv[2] * k[2] as f64;
        let r: [Complex64; 3] = std::array::from_fn(|d| -kk * uk[d] - (conv[d] - kdot * (k[d] as f64 / kk)));
        out.insert(k, r);
    }
    out
}

fn axpy(u: &Modes, a: f64, v: &Modes) -> Modes {
    u.iter()
        .map(|(k, x)| (*k, std::array::from_fn(|d| x[d] + a * v[k][d])))
        .collect()
}

fn rk4(u0: &Modes, t_end: f64, dt: f64) -> Modes {
    let steps = (t_end / dt).round() as usize;
    let mut u = u0.clone();
    for _ in 0..steps {
        let k1 = galerkin_rhs(&u);
        let k2 = galerkin_rhs(&axpy(&u, dt / 2.0, &k1));
        let k3 = galerkin_rhs(&axpy(&u, dt / 2.0, &k2));
        let k4 = galerkin_rhs(&axpy(&u, dt, &k3));
        u = u
            .iter()
            .map(|(k, x)| {
                (
                    *k,
                    std::array::from_fn(|d| x[d] + dt / 6.0 * (k1[k][d] + 2.0 * k2[k][d] + 2.0 * k3[k][d] + k4[k][d])),
                )
            })
            .collect();
    }
    u
}

/// Assumes every key of `a` lies inside the truncation of `b`.
fn enstrophy_of_difference(a: &Modes, b: &SpectralField) -> f64 {
    let mut acc = 0.0;
    for (k, v) in b.iter() {
        let kk = k.norm_sq() as f64;
        if kk == 0.0 {
            continue;
        }
        let w = a.get(&k.0).copied().unwrap_or([Complex64::new(0.0, 0.0); 3]);
        acc += kk * (0..3).map(|d| (v[d] - w[d]).norm_sqr()).sum::<f64>();
    }
    acc * VOLUME
}

#[test]
fn galerkin_solution_matches_direct_rk4_oracle() {
    // n = 36 is exactly the shells |k|^2 <= 2
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let u0 = project_n(&random_field(1, 10.0, &mut rng), 36);
    let oracle = rk4(&to_modes(&u0, 2), 0.1, 1e-5);
    let traj = integrate(&u0, 0.1, &IntegratorConfig::new(1e-3, 36)).unwrap();
    let last = traj.field(traj.len() - 1);
    let err = enstrophy_of_difference(&oracle, &last).sqrt();
    let scale = u0.norms().enstrophy.sqrt();
    assert!(err <= 1e-7 * scale, "error {err:e} relative to {scale:e}");
    // the nonlinearity matters on this interval
    let linear = u0.norms().enstrophy;
    assert!((last.norms().enstrophy - linear * (-0.2f64).exp()).abs() > 1e-4 * linear);
}

#[test]
fn integrating_factor_rk4_is_fourth_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let u0 = random_field(2, 20.0, &mut rng);
    let n = GalerkinSpace::ball(2).dim();
    let finals: Vec<SpectralField> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| {
            let traj = integrate(&u0, 0.5, &IntegratorConfig::new(dt, n)).unwrap();
            traj.field(traj.len() - 1)
        })
        .collect();
    let e1 = finals[0].sub(&finals[1]).norms().enstrophy.sqrt();
    let e2 = finals[1].sub(&finals[2]).norms().enstrophy.sqrt();
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn energy_identity_over_random_small_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let n = GalerkinSpace::ball(2).dim();
    for _ in 0..20 {
        let u0 = random_field(2, rng.random_range(1e-3..1e-1), &mut rng);
        let traj = integrate(&u0, 1.0, &IntegratorConfig::new(1e-3, n)).unwrap();
        let dv: Vec<f64> = (0..traj.len()).map(|j| traj.norms(j).enstrophy).collect();
        let e0 = traj.norms(0).energy;
        let e1 = traj.norms(traj.len() - 1).energy;
        let defect = (e1 + 2.0 * simpson(traj.times(), &dv) - e0).abs();
        assert!(defect <= 1e-8 * e0, "defect {defect:e}");
    }
}

#[test]
fn small_data_enstrophy_never_increases() {
    let ledger = ConstantsLedger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let n = GalerkinSpace::ball(2).dim();
    for _ in 0..20 {
        let target = rng.random_range(0.1..1.0) * ledger.small_data_enstrophy();
        let u0 = random_field(2, target, &mut rng);
        let traj = integrate(&u0, 1.0, &IntegratorConfig::new(1e-2, n)).unwrap();
        for j in 1..traj.len() {
            assert!(traj.norms(j).enstrophy <= traj.norms(j - 1).enstrophy + 1e-10);
        }
    }
}

#[test]
fn shear_mode_decays_exactly_at_full_resolution() {
    let u0 = SpectralField::shear(4, 1.0);
    let n = GalerkinSpace::ball(4).dim();
    let traj = integrate(&u0, 1.0, &IntegratorConfig::new(1e-3, n)).unwrap();
    let err = traj
        .field(traj.len() - 1)
        .sub(&u0.scaled((-1.0f64).exp()))
        .norms()
        .enstrophy
        .sqrt();
    assert!(err <= 1e-8, "{err:e}");
}
