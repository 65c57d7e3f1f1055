//! Divergence-free, mean-zero periodic velocity fields stored as truncated
//! Fourier coefficients on the torus `[0, 2pi]^3`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::ops::Neg;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex amplitude of a single Fourier mode.
pub type CVec3 = [Complex64; 3];

/// Volume of the periodic box, `(2pi)^3`.
pub const VOLUME: f64 = 8.0 * PI * PI * PI;

pub(crate) const ZERO3: CVec3 = [Complex64 { re: 0.0, im: 0.0 }; 3];

/// Exponent cap for the Gevrey weight `exp(2 t |k|)`.
const GEVREY_EXPONENT_CAP: f64 = 700.0;

/// Integer wavevector on the 2pi-periodic torus. `|k|^2` is the Stokes
/// eigenvalue of the modes it carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Wavevector(pub [i32; 3]);

impl Wavevector {
    pub const fn new(k1: i32, k2: i32, k3: i32) -> Self {
        Self([k1, k2, k3])
    }

    pub fn norm_sq(&self) -> u32 {
        self.0.iter().map(|&c| (c * c) as u32).sum()
    }

    pub fn max_norm(&self) -> usize {
        self.0.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// Canonical half-space: the first nonzero component is positive.
    pub fn is_canonical(&self) -> bool {
        match self.0.iter().find(|&&c| c != 0) {
            Some(&c) => c > 0,
            None => false,
        }
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [self.0[0] as f64, self.0[1] as f64, self.0[2] as f64]
    }
}

impl Neg for Wavevector {
    type Output = Self;
    fn neg(self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Energy `||u||^2`, enstrophy `||Du||^2` and `||Au||^2` with the box
/// volume included, so the spectral sums equal integrals over the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub energy: f64,
    pub enstrophy: f64,
    pub h2: f64,
}

pub(crate) fn dot_real(k: &[f64; 3], v: &CVec3) -> Complex64 {
    v[0] * k[0] + v[1] * k[1] + v[2] * k[2]
}

fn norm_sq3(v: &CVec3) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn conj3(v: &CVec3) -> CVec3 {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

/// Remove the component of `v` along `k`.
pub(crate) fn project_mode(k: &Wavevector, v: &CVec3) -> CVec3 {
    let kf = k.as_f64();
    let k2 = k.norm_sq() as f64;
    if k2 == 0.0 {
        return ZERO3;
    }
    let s = dot_real(&kf, v) / k2;
    [v[0] - s * kf[0], v[1] - s * kf[1], v[2] - s * kf[2]]
}

/// A real, divergence-free, mean-zero field truncated to the cube
/// `|k|_inf <= K`. Coefficients are stored densely for the whole cube;
/// the reality condition `u_{-k} = conj(u_k)` is maintained by every
/// constructor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    truncation: usize,
    coeffs: Vec<CVec3>,
}

impl SpectralField {
    pub fn zeros(truncation: usize) -> Self {
        let side = 2 * truncation + 1;
        Self {
            truncation,
            coeffs: vec![ZERO3; side * side * side],
        }
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    fn side(&self) -> usize {
        2 * self.truncation + 1
    }

    pub(crate) fn index(&self, k: &Wavevector) -> Option<usize> {
        let kt = self.truncation as i32;
        if k.0.iter().any(|c| c.abs() > kt) {
            return None;
        }
        let side = self.side();
        let [a, b, c] = k.0;
        Some((((a + kt) as usize) * side + (b + kt) as usize) * side + (c + kt) as usize)
    }

    pub(crate) fn wavevector_at(&self, idx: usize) -> Wavevector {
        let side = self.side();
        let kt = self.truncation as i32;
        let c = (idx % side) as i32 - kt;
        let b = ((idx / side) % side) as i32 - kt;
        let a = (idx / (side * side)) as i32 - kt;
        Wavevector([a, b, c])
    }

    /// Coefficient at `k`, zero outside the truncation.
    pub fn get(&self, k: &Wavevector) -> CVec3 {
        self.index(k).map(|i| self.coeffs[i]).unwrap_or(ZERO3)
    }

    /// Set `u_k` and `u_{-k} = conj(u_k)` together. `k` must be nonzero and
    /// inside the truncation.
    pub(crate) fn set_pair(&mut self, k: &Wavevector, v: CVec3) {
        let i = self.index(k).expect("wavevector inside truncation");
        let j = self.index(&-*k).expect("wavevector inside truncation");
        self.coeffs[i] = v;
        self.coeffs[j] = conj3(&v);
    }

    pub(crate) fn add_pair(&mut self, k: &Wavevector, v: CVec3) {
        let cur = self.get(k);
        self.set_pair(k, [cur[0] + v[0], cur[1] + v[1], cur[2] + v[2]]);
    }

    /// All stored modes `(k, u_k)`, including the zero mode and both halves.
    pub fn iter(&self) -> impl Iterator<Item = (Wavevector, &CVec3)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.wavevector_at(i), v))
    }

    /// Modes in the canonical half-space.
    pub fn iter_canonical(&self) -> impl Iterator<Item = (Wavevector, &CVec3)> + '_ {
        self.iter().filter(|(k, _)| k.is_canonical())
    }

    /// Shear flow `amplitude * (sin x3, 0, 0)`.
    pub fn shear(truncation: usize, amplitude: f64) -> Self {
        assert!(truncation >= 1, "shear mode needs truncation >= 1");
        let mut u = Self::zeros(truncation);
        // sin x3 = (e^{i x3} - e^{-i x3}) / 2i
        u.set_pair(
            &Wavevector::new(0, 0, 1),
            [
                Complex64::new(0.0, -amplitude / 2.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        u
    }

    pub fn norms(&self) -> Norms {
        let mut n = Norms {
            energy: 0.0,
            enstrophy: 0.0,
            h2: 0.0,
        };
        for (k, v) in self.iter() {
            let a = norm_sq3(v);
            if a == 0.0 {
                continue;
            }
            let l = k.norm_sq() as f64;
            n.energy += a;
            n.enstrophy += l * a;
            n.h2 += l * l * a;
        }
        n.energy *= VOLUME;
        n.enstrophy *= VOLUME;
        n.h2 *= VOLUME;
        n
    }

    /// L^2 inner product over the torus.
    pub fn inner(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (k, v) in self.iter() {
            let w = other.get(&k);
            acc += (0..3).map(|d| (v[d] * w[d].conj()).re).sum::<f64>();
        }
        acc * VOLUME
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            truncation: self.truncation,
            coeffs: self.coeffs.iter().map(|v| [v[0] * a, v[1] * a, v[2] * a]).collect(),
        }
    }

    /// `self + a * other`, at the larger of the two truncations.
    pub fn add_scaled(&self, other: &Self, a: f64) -> Self {
        let kt = self.truncation.max(other.truncation);
        let mut out = self.resized(kt);
        for (k, w) in other.iter() {
            if norm_sq3(w) == 0.0 {
                continue;
            }
            let i = out.index(&k).unwrap();
            let v = &mut out.coeffs[i];
            for d in 0..3 {
                v[d] += w[d] * a;
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, -1.0)
    }

    /// Copy into a cube of a different truncation, discarding modes that
    /// fall outside it.
    pub fn resized(&self, truncation: usize) -> Self {
        if truncation == self.truncation {
            return self.clone();
        }
        let mut out = Self::zeros(truncation);
        for (k, v) in self.iter() {
            if let Some(i) = out.index(&k) {
                out.coeffs[i] = *v;
            }
        }
        out
    }

    /// Largest `|k|_inf` carrying a nonzero coefficient.
    pub fn support_radius(&self) -> usize {
        self.iter()
            .filter(|(_, v)| norm_sq3(v) != 0.0)
            .map(|(k, _)| k.max_norm())
            .max()
            .unwrap_or(0)
    }

    /// Largest `|k . u_k|` over stored modes.
    pub fn max_divergence(&self) -> f64 {
        self.iter()
            .map(|(k, v)| dot_real(&k.as_f64(), v).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coeffs.iter().map(|v| norm_sq3(v).sqrt()).fold(0.0, f64::max)
    }

    /// Weighted norm `sum |k|^2 exp(2 t |k|) |u_k|^2 (2pi)^3`, i.e. the
    /// squared norm of `A^{1/2} exp(t A^{1/2}) u`.
    pub fn gevrey_norm(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidConfig(format!("gevrey time must be >= 0, got {t}")));
        }
        let mut acc = 0.0;
        for (k, v) in self.iter() {
            let a = norm_sq3(v);
            if a == 0.0 {
                continue;
            }
            let l = k.norm_sq() as f64;
            let exponent = 2.0 * t * l.sqrt();
            if exponent > GEVREY_EXPONENT_CAP {
                return Err(Error::GevreyOutOfRange(exponent));
            }
            acc += l * exponent.exp() * a;
        }
        Ok(acc * VOLUME)
    }

    /// Write the versioned text record: a header, the truncation, then one
    /// line per nonzero canonical mode `k1 k2 k3 re1 im1 re2 im2 re3 im3`.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{FIELD_MAGIC}")?;
        writeln!(out, "truncation {}", self.truncation)?;
        for (k, v) in self.iter_canonical() {
            if norm_sq3(v) == 0.0 {
                continue;
            }
            let mut line = format!("{} {} {}", k.0[0], k.0[1], k.0[2]);
            for c in v {
                write!(line, " {:?} {:?}", c.re, c.im).unwrap();
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parse the text record. Modes must be canonical, inside the declared
    /// truncation, and divergence-free to `1e-12` relative.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let bad = |msg: String| Error::MalformedField(msg);
        let mut lines = input
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let (_, header) = lines.next().ok_or_else(|| bad("empty file".into()))?;
        if header?.trim() != FIELD_MAGIC {
            return Err(bad(format!("missing header `{FIELD_MAGIC}`")));
        }
        let (_, trunc_line) = lines.next().ok_or_else(|| bad("missing truncation line".into()))?;
        let trunc_line = trunc_line?;
        let truncation: usize = trunc_line
            .trim()
            .strip_prefix("truncation")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad(format!("bad truncation line `{trunc_line}`")))?;
        let mut u = Self::zeros(truncation);
        let mut seen = std::collections::BTreeSet::new();
        for (lineno, line) in lines {
            let line = line?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 9 {
                return Err(bad(format!("line {}: expected 9 columns", lineno + 1)));
            }
            let mut k = [0i32; 3];
            for d in 0..3 {
                k[d] = toks[d]
                    .parse()
                    .map_err(|_| bad(format!("line {}: bad wavevector", lineno + 1)))?;
            }
            let mut vals = [0f64; 6];
            for d in 0..6 {
                vals[d] = toks[3 + d]
                    .parse()
                    .map_err(|_| bad(format!("line {}: bad coefficient", lineno + 1)))?;
                if !vals[d].is_finite() {
                    return Err(bad(format!("line {}: non-finite coefficient", lineno + 1)));
                }
            }
            let k = Wavevector(k);
            if !k.is_canonical() {
                return Err(bad(format!("line {}: wavevector {:?} not canonical", lineno + 1, k.0)));
            }
            if k.max_norm() > truncation {
                return Err(bad(format!(
                    "line {}: wavevector {:?} outside truncation",
                    lineno + 1,
                    k.0
                )));
            }
            if !seen.insert(k) {
                return Err(bad(format!("line {}: duplicate wavevector {:?}", lineno + 1, k.0)));
            }
            let v = [
                Complex64::new(vals[0], vals[1]),
                Complex64::new(vals[2], vals[3]),
                Complex64::new(vals[4], vals[5]),
            ];
            let div = dot_real(&k.as_f64(), &v).norm();
            let scale = (k.norm_sq() as f64).sqrt() * norm_sq3(&v).sqrt();
            if div > 1e-12 * scale {
                return Err(bad(format!(
                    "line {}: mode {:?} is not divergence-free",
                    lineno + 1,
                    k.0
                )));
            }
            u.set_pair(&k, v);
        }
        Ok(u)
    }
}

pub const FIELD_MAGIC: &str = "# enstrophy-cert field v1";

/// Leray projection of a raw coefficient map: every mode is replaced by
/// `u_k - k (k . u_k) / |k|^2`. The input must be conjugate-symmetric and
/// mean-free.
pub fn leray_project(truncation: usize, raw: &BTreeMap<Wavevector, CVec3>) -> Result<SpectralField> {
    const SYM_TOL: f64 = 1e-14;
    let scale = raw.values().map(|v| norm_sq3(v).sqrt()).fold(0.0, f64::max);
    let mut u = SpectralField::zeros(truncation);
    for (k, v) in raw {
        if k.max_norm() > truncation {
            return Err(Error::OutsideTruncation(k.0, truncation));
        }
        if k.is_zero() {
            if norm_sq3(v) != 0.0 {
                return Err(Error::NonzeroMean);
            }
            continue;
        }
        let partner = raw.get(&-*k).copied().unwrap_or(ZERO3);
        let mismatch = (0..3).map(|d| (partner[d] - v[d].conj()).norm()).fold(0.0, f64::max);
        if mismatch > SYM_TOL * scale {
            return Err(Error::NotConjugateSymmetric(k.0));
        }
        if k.is_canonical() {
            u.set_pair(k, project_mode(k, v));
        }
    }
    Ok(u)
}
