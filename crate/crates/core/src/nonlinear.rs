//! The bilinear term `B(u, u) = P[(u . grad) u]`.
//!
//! The pseudospectral path evaluates products on a collocation grid large
//! enough that no aliased product lands inside the retained cube (the 3/2
//! padding form of the 2/3 rule). The direct path sums the truncated
//! convolution and is kept as an oracle for small truncations.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{project_mode, CVec3, SpectralField, Wavevector, ZERO3};

/// Largest truncation accepted by the direct convolution oracle.
pub const DIRECT_MAX_TRUNCATION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearMode {
    Pseudospectral,
    DirectConvolution,
}

struct Grid {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    bufs: [Vec<Complex64>; 5],
    tmp: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Grid {
    fn new(planner: &mut FftPlanner<f64>, m: usize) -> Self {
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let n = m * m * m;
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            m,
            forward,
            inverse,
            bufs: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]),
            tmp: vec![Complex64::new(0.0, 0.0); n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    fn slot(&self, k: &Wavevector) -> usize {
        let m = self.m as i32;
        let w = |c: i32| c.rem_euclid(m) as usize;
        (w(k.0[0]) * self.m + w(k.0[1])) * self.m + w(k.0[2])
    }

    /// Inverse transform of data supported on `|k|_inf <= s`; lines that
    /// are identically zero are skipped.
    fn inverse(&mut self, which: usize, s: usize) {
        let Grid {
            m,
            inverse: fft,
            bufs,
            tmp,
            scratch,
            ..
        } = self;
        let m = *m;
        let buf = &mut bufs[which];
        let band = band(m, s);
        // last axis, contiguous
        for &a in &band {
            for &b in &band {
                let row = (a * m + b) * m;
                fft.process_with_scratch(&mut buf[row..row + m], scratch);
            }
        }
        // middle axis, only planes carrying data
        for &a in &band {
            let plane = &mut buf[a * m * m..(a + 1) * m * m];
            for b in 0..m {
                for c in 0..m {
                    tmp[c * m + b] = plane[b * m + c];
                }
            }
            fft.process_with_scratch(&mut tmp[..m * m], scratch);
            for b in 0..m {
                for c in 0..m {
                    plane[b * m + c] = tmp[c * m + b];
                }
            }
        }
        // first axis, one (a, c) slab at a time
        for b in 0..m {
            for a in 0..m {
                let row = (a * m + b) * m;
                for c in 0..m {
                    tmp[c * m + a] = buf[row + c];
                }
            }
            fft.process_with_scratch(&mut tmp[..m * m], scratch);
            for a in 0..m {
                let row = (a * m + b) * m;
                for c in 0..m {
                    buf[row + c] = tmp[c * m + a];
                }
            }
        }
    }

    /// Forward transform computing only the outputs with `|k|_inf <= r`.
    fn forward(&mut self, which: usize, r: usize) {
        let Grid {
            m,
            forward: fft,
            bufs,
            tmp,
            scratch,
            ..
        } = self;
        let m = *m;
        let buf = &mut bufs[which];
        let band = band(m, r);
        let w = band.len();
        fft.process_with_scratch(buf, scratch);
        for a in 0..m {
            let plane = &mut buf[a * m * m..(a + 1) * m * m];
            for (j, &c) in band.iter().enumerate() {
                for b in 0..m {
                    tmp[j * m + b] = plane[b * m + c];
                }
            }
            fft.process_with_scratch(&mut tmp[..w * m], scratch);
            for (j, &c) in band.iter().enumerate() {
                for b in 0..m {
                    plane[b * m + c] = tmp[j * m + b];
                }
            }
        }
        for &b in &band {
            for (j, &c) in band.iter().enumerate() {
                for a in 0..m {
                    tmp[j * m + a] = buf[(a * m + b) * m + c];
                }
            }
            fft.process_with_scratch(&mut tmp[..w * m], scratch);
            for (j, &c) in band.iter().enumerate() {
                for a in 0..m {
                    buf[(a * m + b) * m + c] = tmp[j * m + a];
                }
            }
        }
    }
}

/// Smallest `2^a 3^b >= min`.
fn smooth_size(min: usize) -> usize {
    let mut best = usize::MAX;
    let mut p3 = 1;
    while p3 < best {
        let mut n = p3;
        while n < min {
            n *= 2;
        }
        best = best.min(n);
        p3 *= 3;
    }
    best
}

/// Grid indices of the wavenumbers `-s..=s` on a side of `m > 2s` points.
fn band(m: usize, s: usize) -> Vec<usize> {
    (0..=s).chain(m - s..m).filter(|&i| i < m).collect()
}

/// Reusable pseudospectral evaluator. Holds FFT plans and scratch grids,
/// so one instance belongs to one worker.
pub struct NonlinearEvaluator {
    planner: FftPlanner<f64>,
    grids: HashMap<usize, Grid>,
}

impl Default for NonlinearEvaluator {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for NonlinearEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NonlinearEvaluator")
            .field("grids", &self.grids.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl NonlinearEvaluator {
    pub fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
            grids: HashMap::new(),
        }
    }

    /// `B(u, u)` restricted to the cube `|k|_inf <= out_truncation`.
    ///
    /// The grid has at least `2s + r + 1` points per side, where `s` is the
    /// support radius of `u` and `r` the output truncation; products of
    /// modes up to `s` then alias only onto wavenumbers beyond `r`. The side
    /// is rounded up to a 3-smooth length, for which the FFT is much faster.
    pub fn evaluate(&mut self, u: &SpectralField, out_truncation: usize) -> SpectralField {
        let s = u.support_radius();
        let r = out_truncation;
        let mut out = SpectralField::zeros(r);
        if s == 0 || r == 0 {
            return out;
        }
        let m = smooth_size(2 * s + r + 1);
        let grid = match self.grids.entry(m) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => e.insert(Grid::new(&mut self.planner, m)),
        };
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        grid.bufs[0].fill(zero);
        grid.bufs[1].fill(zero);
        for (k, v) in u.iter() {
            if k.max_norm() > s {
                continue;
            }
            let slot = grid.slot(&k);
            grid.bufs[0][slot] = v[0] + i * v[1];
            grid.bufs[1][slot] = v[2];
        }
        grid.inverse(0, s);
        grid.inverse(1, s);
        let n = m * m * m;
        {
            let [b0, b1, b2, b3, b4] = &mut grid.bufs;
            for p in 0..n {
                let (u1, u2, u3) = (b0[p].re, b0[p].im, b1[p].re);
                b2[p] = Complex64::new(u1 * u1, u2 * u2);
                b3[p] = Complex64::new(u3 * u3, u1 * u2);
                b4[p] = Complex64::new(u1 * u3, u2 * u3);
            }
        }
        grid.forward(2, r);
        grid.forward(3, r);
        grid.forward(4, r);
        let norm = 1.0 / n as f64;
        let half = Complex64::new(0.5, 0.0);
        let half_i = Complex64::new(0.0, -0.5);
        let rt = r as i32;
        for a in -rt..=rt {
            for b in -rt..=rt {
                for c in -rt..=rt {
                    let k = Wavevector::new(a, b, c);
                    if !k.is_canonical() {
                        continue;
                    }
                    let sp = grid.slot(&k);
                    let sm = grid.slot(&-k);
                    let unpack = |buf: &Vec<Complex64>| {
                        let (x, y) = (buf[sp], buf[sm].conj());
                        ((x + y) * half * norm, (x - y) * half_i * norm)
                    };
                    let (p11, p22) = unpack(&grid.bufs[2]);
                    let (p33, p12) = unpack(&grid.bufs[3]);
                    let (p13, p23) = unpack(&grid.bufs[4]);
                    let kf = k.as_f64();
                    // ((u.grad)u)_i = d_j (u_j u_i) for divergence-free u
                    let rows = [[p11, p12, p13], [p12, p22, p23], [p13, p23, p33]];
                    let mut v = ZERO3;
                    for (d, row) in rows.iter().enumerate() {
                        v[d] = i * (row[0] * kf[0] + row[1] * kf[1] + row[2] * kf[2]);
                    }
                    out.set_pair(&k, project_mode(&k, &v));
                }
            }
        }
        out
    }

    /// The untruncated `B(u, u)`, whose support is twice that of `u`.
    pub fn evaluate_full(&mut self, u: &SpectralField) -> SpectralField {
        self.evaluate(u, 2 * u.support_radius())
    }
}

/// Exact truncated convolution `sum_{p+q=k} (u_p . i q) u_q`, projected.
pub fn direct_convolution(u: &SpectralField, out_truncation: usize) -> Result<SpectralField> {
    let t = u.truncation().max(out_truncation);
    if t > DIRECT_MAX_TRUNCATION {
        return Err(Error::CostGuard {
            max: DIRECT_MAX_TRUNCATION,
            got: t,
        });
    }
    let active: Vec<(Wavevector, CVec3)> = u
        .iter()
        .filter(|(_, v)| v.iter().any(|c| c.norm_sqr() != 0.0))
        .map(|(k, v)| (k, *v))
        .collect();
    let i = Complex64::new(0.0, 1.0);
    let mut out = SpectralField::zeros(out_truncation);
    let rt = out_truncation as i32;
    for a in -rt..=rt {
        for b in -rt..=rt {
            for c in -rt..=rt {
                let k = Wavevector::new(a, b, c);
                if !k.is_canonical() {
                    continue;
                }
                let mut acc = ZERO3;
                for (p, up) in &active {
                    let q = Wavevector([k.0[0] - p.0[0], k.0[1] - p.0[1], k.0[2] - p.0[2]]);
                    let uq = u.get(&q);
                    let qf = q.as_f64();
                    let adv = i * (up[0] * qf[0] + up[1] * qf[1] + up[2] * qf[2]);
                    for d in 0..3 {
                        acc[d] += adv * uq[d];
                    }
                }
                out.set_pair(&k, project_mode(&k, &acc));
            }
        }
    }
    Ok(out)
}

/// `B(u, u)` at the truncation of `u`.
pub fn nonlinear_term(u: &SpectralField, mode: NonlinearMode) -> Result<SpectralField> {
    match mode {
        NonlinearMode::Pseudospectral => Ok(NonlinearEvaluator::new().evaluate(u, u.truncation())),
        NonlinearMode::DirectConvolution => direct_convolution(u, u.truncation()),
    }
}
