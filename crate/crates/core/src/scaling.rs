//! Conversion between physical problems on `[0, L]^3` with viscosity `nu`
//! and the non-dimensional problem on `[0, 2pi]^3` with unit viscosity.
//!
//! With `x' = 2pi x / L`, `t' = 4pi^2 nu t / L^2` and `u' = L u / (2pi nu)`,
//! a physical field `sum u_k exp(2pi i k.x / L)` maps to the
//! non-dimensional field with the same integer wavevectors and coefficients
//! scaled by `L / (2pi nu)`. Enstrophies then satisfy
//! `||Du'||^2 = ||Du||^2 / (nu^2 lambda1^{1/2})`, `lambda1 = 4pi^2 / L^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::ConstantsLedger;
use crate::error::{Error, Result};
use crate::field::{Norms, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub length: f64,
    pub viscosity: f64,
}

impl Scaling {
    pub fn new(length: f64, viscosity: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite() && viscosity > 0.0 && viscosity.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "length and viscosity must be positive, got {length}, {viscosity}"
            )));
        }
        Ok(Self { length, viscosity })
    }

    pub fn lambda1(&self) -> f64 {
        (2.0 * PI / self.length).powi(2)
    }

    /// `L / (2pi nu)`.
    pub fn velocity_factor(&self) -> f64 {
        self.length / (2.0 * PI * self.viscosity)
    }

    /// `4pi^2 nu / L^2`.
    pub fn time_factor(&self) -> f64 {
        self.viscosity * self.lambda1()
    }

    pub fn to_nondimensional(&self, physical: &SpectralField) -> SpectralField {
        physical.scaled(self.velocity_factor())
    }

    pub fn to_physical(&self, nondimensional: &SpectralField) -> SpectralField {
        nondimensional.scaled(1.0 / self.velocity_factor())
    }

    pub fn to_nondimensional_time(&self, t: f64) -> f64 {
        t * self.time_factor()
    }

    pub fn to_physical_time(&self, t: f64) -> f64 {
        t / self.time_factor()
    }

    /// Norms of a physical field on `[0, L]^3` with wavenumbers `2pi k / L`.
    pub fn physical_norms(&self, physical: &SpectralField) -> Norms {
        let n = physical.norms();
        let r = self.length / (2.0 * PI);
        Norms {
            energy: n.energy * r.powi(3),
            enstrophy: n.enstrophy * r,
            h2: n.h2 / r,
        }
    }

    /// `base` with this problem's `nu` and `lambda1`.
    pub fn ledger(&self, base: &ConstantsLedger) -> ConstantsLedger {
        ConstantsLedger {
            nu: self.viscosity,
            lambda1: self.lambda1(),
            ..*base
        }
    }

    /// Small-data criterion `||Du||^2 <= c^{-1/2} nu^2 lambda1^{1/2}` in
    /// physical units.
    pub fn physical_small_data_check(&self, physical: &SpectralField, base: &ConstantsLedger) -> bool {
        self.physical_norms(physical).enstrophy <= self.ledger(base).small_data_enstrophy()
    }
}
