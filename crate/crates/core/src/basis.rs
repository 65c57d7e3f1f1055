//! Real Stokes eigenbasis on the torus and finite Galerkin subspaces.
//!
//! Every canonical wavevector `k` carries four real, L^2-normalised
//! eigenfunctions with eigenvalue `|k|^2`:
//!
//! ```text
//! w = sqrt(2) / (2pi)^{3/2} * e_p * cos(k.x)     (part = Cos)
//! w = sqrt(2) / (2pi)^{3/2} * e_p * sin(k.x)     (part = Sin)
//! ```
//!
//! where `e_1, e_2` are real orthonormal vectors perpendicular to `k`.
//! Ordinals sort by eigenvalue, then canonical wavevector
//! lexicographically, then part, then polarization.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::{dot_real, SpectralField, Wavevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisPart {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StokesBasisIndex {
    /// 1-based position in the global enumeration.
    pub ordinal: usize,
    pub wavevector: Wavevector,
    pub part: BasisPart,
    /// 1 or 2.
    pub polarization: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFunction {
    pub index: StokesBasisIndex,
    pub eigenvalue: u32,
    pub polarization_vector: [f64; 3],
}

/// Amplitude normalising `e cos(k.x)` to unit L^2 norm on the torus.
fn mode_scale() -> f64 {
    2f64.sqrt() / (2.0 * PI).powf(1.5)
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Orthonormal pair perpendicular to `k`: Gram-Schmidt on the coordinate
/// axis least aligned with `k` (lowest index on ties), then `k_hat x e_1`.
pub fn polarization_vectors(k: &Wavevector) -> [[f64; 3]; 2] {
    let kh = normalize(k.as_f64());
    let mut axis = 0;
    for d in 1..3 {
        if kh[d].abs() < kh[axis].abs() {
            axis = d;
        }
    }
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    let proj = kh[axis];
    let e1 = normalize([a[0] - proj * kh[0], a[1] - proj * kh[1], a[2] - proj * kh[2]]);
    let e2 = [
        kh[1] * e1[2] - kh[2] * e1[1],
        kh[2] * e1[0] - kh[0] * e1[2],
        kh[0] * e1[1] - kh[1] * e1[0],
    ];
    [e1, e2]
}

/// Every basis function with eigenvalue `<= max_eigenvalue`, in ordinal order.
pub fn enumerate_up_to(max_eigenvalue: u32) -> Vec<BasisFunction> {
    let r = (max_eigenvalue as f64).sqrt().floor() as i32 + 1;
    let mut ks = Vec::new();
    for a in 0..=r {
        for b in -r..=r {
            for c in -r..=r {
                let k = Wavevector::new(a, b, c);
                if k.is_canonical() && k.norm_sq() <= max_eigenvalue {
                    ks.push(k);
                }
            }
        }
    }
    ks.sort_by_key(|k| (k.norm_sq(), *k));
    let mut out = Vec::with_capacity(4 * ks.len());
    for k in ks {
        let pol = polarization_vectors(&k);
        for part in [BasisPart::Cos, BasisPart::Sin] {
            for p in 0..2u8 {
                out.push(BasisFunction {
                    index: StokesBasisIndex {
                        ordinal: out.len() + 1,
                        wavevector: k,
                        part,
                        polarization: p + 1,
                    },
                    eigenvalue: k.norm_sq(),
                    polarization_vector: pol[p as usize],
                });
            }
        }
    }
    out
}

/// The first `n` basis functions.
pub fn first(n: usize) -> Vec<BasisFunction> {
    if n == 0 {
        return Vec::new();
    }
    let mut limit = 1u32;
    loop {
        let mut fs = enumerate_up_to(limit);
        if fs.len() >= n {
            fs.truncate(n);
            return fs;
        }
        limit *= 2;
    }
}

/// Number of basis functions with eigenvalue strictly below `threshold`.
/// Counts lattice points directly, in `O(threshold)` time.
pub fn count_below(threshold: f64) -> usize {
    if !(threshold > 1.0) {
        return 0;
    }
    let limit = threshold.ceil() as u64 - 1;
    let r = limit.isqrt() as i64;
    let mut canonical = 0u64;
    for a in 0..=r {
        for b in -r..=r {
            let ab = (a * a + b * b) as u64;
            if ab > limit {
                continue;
            }
            let c = (limit - ab).isqrt();
            canonical += match (a, b) {
                (0, 0) => c,
                (0, b) if b < 0 => 0,
                _ => 2 * c + 1,
            };
        }
    }
    4 * canonical as usize
}

/// Eigenvalue of the basis function with the given 1-based ordinal.
pub fn eigenvalue_of(ordinal: usize) -> u32 {
    first(ordinal).last().map(|f| f.eigenvalue).expect("ordinal >= 1")
}

/// A finite set of basis functions spanning a Galerkin subspace, with the
/// coordinate maps between fields and real coefficient vectors.
#[derive(Debug, Clone)]
pub struct GalerkinSpace {
    functions: Vec<BasisFunction>,
    support: usize,
}

impl GalerkinSpace {
    pub fn new(functions: Vec<BasisFunction>) -> Self {
        let support = functions
            .iter()
            .map(|f| f.index.wavevector.max_norm())
            .max()
            .unwrap_or(0);
        Self { functions, support }
    }

    /// Span of the first `n` eigenfunctions (the range of `P_n`).
    pub fn first(n: usize) -> Self {
        Self::new(first(n))
    }

    /// Every basis function inside the cube `|k|_inf <= truncation`.
    pub fn cube(truncation: usize) -> Self {
        let t = truncation as u32;
        Self::new(
            enumerate_up_to(3 * t * t)
                .into_iter()
                .filter(|f| f.index.wavevector.max_norm() <= truncation)
                .collect(),
        )
    }

    /// Every basis function with `|k| <= radius`.
    pub fn ball(radius: usize) -> Self {
        let r = radius as u32;
        Self::new(enumerate_up_to(r * r))
    }

    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    /// Largest `|k|_inf` among the spanning functions.
    pub fn support(&self) -> usize {
        self.support
    }

    pub fn functions(&self) -> &[BasisFunction] {
        &self.functions
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.functions.iter().map(|f| f.eigenvalue as f64)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().fold(0.0, f64::max)
    }

    /// Coefficients of the orthogonal projection of `u` onto the span.
    pub fn coords(&self, u: &SpectralField) -> Vec<f64> {
        let scale = 2.0 / mode_scale();
        self.functions
            .iter()
            .map(|f| {
                let v = u.get(&f.index.wavevector);
                let proj = dot_real(&f.polarization_vector, &v);
                match f.index.part {
                    BasisPart::Cos => scale * proj.re,
                    BasisPart::Sin => -scale * proj.im,
                }
            })
            .collect()
    }

    /// `sum alpha_j w_j` as a field with the given truncation. Coefficients
    /// of functions outside the truncation must be zero.
    pub fn to_field(&self, alpha: &[f64], truncation: usize) -> SpectralField {
        assert_eq!(alpha.len(), self.functions.len());
        let half = mode_scale() / 2.0;
        let mut u = SpectralField::zeros(truncation);
        for (f, &a) in self.functions.iter().zip(alpha) {
            if a == 0.0 {
                continue;
            }
            let k = f.index.wavevector;
            assert!(
                k.max_norm() <= truncation,
                "basis function {} outside truncation {truncation}",
                f.index.ordinal
            );
            let amp = match f.index.part {
                BasisPart::Cos => Complex64::new(half * a, 0.0),
                BasisPart::Sin => Complex64::new(0.0, -half * a),
            };
            let v = f.polarization_vector.map(|p| amp * p);
            u.add_pair(&k, v);
        }
        u
    }

    /// Field at the space's own support truncation.
    pub fn field(&self, alpha: &[f64]) -> SpectralField {
        self.to_field(alpha, self.support)
    }

    pub fn energy(&self, alpha: &[f64]) -> f64 {
        alpha.iter().map(|a| a * a).sum()
    }

    pub fn enstrophy(&self, alpha: &[f64]) -> f64 {
        self.eigenvalues().zip(alpha).map(|(l, a)| l * a * a).sum()
    }

    pub fn h2(&self, alpha: &[f64]) -> f64 {
        self.eigenvalues().zip(alpha).map(|(l, a)| l * l * a * a).sum()
    }
}

/// Orthogonal projection onto the first `n` eigenfunctions.
pub fn project_n(u: &SpectralField, n: usize) -> SpectralField {
    let space = GalerkinSpace::first(n);
    // coordinates of functions outside the cube vanish, so to_field accepts them
    space.to_field(&space.coords(u), u.truncation())
}
