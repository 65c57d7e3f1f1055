//! Seeded random fields for pilot runs, tests and the CLI.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::basis::GalerkinSpace;
use crate::field::{leray_project, CVec3, SpectralField, Wavevector};

/// Random divergence-free field on the cube `|k|_inf <= truncation`, with
/// Gaussian modes weighted by `1 / (1 + |k|^2)` and rescaled to the
/// requested enstrophy.
pub fn random_field<R: Rng + ?Sized>(truncation: usize, enstrophy: f64, rng: &mut R) -> SpectralField {
    let t = truncation as i32;
    let mut raw: BTreeMap<Wavevector, CVec3> = BTreeMap::new();
    for a in -t..=t {
        for b in -t..=t {
            for c in -t..=t {
                let k = Wavevector::new(a, b, c);
                if !k.is_canonical() {
                    continue;
                }
                let w = 1.0 / (1.0 + k.norm_sq() as f64);
                let v: CVec3 = std::array::from_fn(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * w, im * w)
                });
                raw.insert(-k, [v[0].conj(), v[1].conj(), v[2].conj()]);
                raw.insert(k, v);
            }
        }
    }
    let u = leray_project(truncation, &raw).expect("symmetric by construction");
    let e = u.norms().enstrophy;
    if e == 0.0 {
        u
    } else {
        u.scaled((enstrophy / e).sqrt())
    }
}

/// [`random_field`] drawn from a ChaCha8 stream with the given seed.
pub fn seeded_random_field(truncation: usize, enstrophy: f64, seed: u64) -> SpectralField {
    random_field(truncation, enstrophy, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random coefficient vector in `space`, uniformly distributed in direction,
/// with `||A u|| = radius`.
pub fn random_on_h2_sphere<R: Rng + ?Sized>(space: &GalerkinSpace, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut alpha: Vec<f64> = space
        .eigenvalues()
        .map(|l| rng.sample::<f64, _>(StandardNormal) / l)
        .collect();
    let h2 = space.h2(&alpha).sqrt();
    if h2 > 0.0 {
        for a in &mut alpha {
            *a *= radius / h2;
        }
    }
    alpha
}

/// Random coefficient vector in the H^2 ball `||A u|| <= radius`, uniform in
/// the ball's volume.
pub fn random_in_h2_ball<R: Rng + ?Sized>(space: &GalerkinSpace, radius: f64, rng: &mut R) -> Vec<f64> {
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / space.dim().max(1) as f64);
    random_on_h2_sphere(space, r, rng)
}
