use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The absolute constants entering the small-data criterion, the robustness
/// threshold and the Gevrey reduction.
///
/// `c_const` defaults to `27 k^4 / 16` with `k = 9 * 2^(15/4)`, the Sobolev
/// trilinear constant for the cube. When only `k_const` is overridden the
/// derived `c_const` follows it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub k_const: f64,
    pub c_const: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    pub lambda1: f64,
    pub nu: f64,
}

impl ConstantsLedger {
    pub const DEFAULT_K1: f64 = 3266.0;

    pub fn default_k() -> f64 {
        9.0 * 2f64.powf(15.0 / 4.0)
    }

    pub fn c_from_k(k: f64) -> f64 {
        27.0 * k.powi(4) / 16.0
    }

    /// Build a ledger from optional overrides, deriving `c` from `k` when
    /// `c` is not given.
    pub fn with_overrides(
        k_const: Option<f64>,
        c_const: Option<f64>,
        k1: Option<f64>,
        lambda1: Option<f64>,
        nu: Option<f64>,
    ) -> Result<Self> {
        let k_const = k_const.unwrap_or_else(Self::default_k);
        let ledger = Self {
            k_const,
            c_const: c_const.unwrap_or_else(|| Self::c_from_k(k_const)),
            k1: k1.unwrap_or(Self::DEFAULT_K1),
            lambda1: lambda1.unwrap_or(1.0),
            nu: nu.unwrap_or(1.0),
        };
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k_const", self.k_const),
            ("c_const", self.c_const),
            ("K1", self.k1),
            ("lambda1", self.lambda1),
            ("nu", self.nu),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "constant {name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// True when `c_const` differs from the value of the default ledger.
    pub fn c_overridden(&self) -> bool {
        self.c_const != Self::default().c_const
    }

    /// Enstrophy threshold `c^{-1/2} nu^2 lambda1^{1/2}` of the small-data criterion.
    pub fn small_data_enstrophy(&self) -> f64 {
        self.c_const.powf(-0.5) * self.nu * self.nu * self.lambda1.sqrt()
    }

    /// Radius of the small-data ball in the V norm, `c^{-1/4} nu lambda1^{1/2}`.
    pub fn small_data_radius(&self) -> f64 {
        self.c_const.powf(-0.25) * self.nu * self.lambda1.sqrt()
    }
}

impl Default for ConstantsLedger {
    fn default() -> Self {
        let k_const = Self::default_k();
        Self {
            k_const,
            c_const: Self::c_from_k(k_const),
            k1: Self::DEFAULT_K1,
            lambda1: 1.0,
            nu: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_c_matches_closed_form() {
        // 27 * 9^4 * 2^15 / 16 = 27 * 6561 * 2048
        let ledger = ConstantsLedger::default();
        assert!((ledger.c_const / 362_797_056.0 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn small_data_radius_is_about_seven_thousandths() {
        let r = ConstantsLedger::default().small_data_radius();
        assert!((0.0069..=0.0073).contains(&r), "R_V = {r}");
        let closed = 2.0 / (9.0 * 2f64.powf(15.0 / 4.0) * 27f64.powf(0.25));
        assert!((r - closed).abs() < 1e-15);
    }

    #[test]
    fn overriding_k_rederives_c() {
        let ledger = ConstantsLedger::with_overrides(Some(2.0), None, None, None, None).unwrap();
        assert_eq!(ledger.c_const, 27.0);
        assert!(ledger.c_overridden());
    }

    #[test]
    fn rejects_non_positive() {
        assert!(ConstantsLedger::with_overrides(None, Some(0.0), None, None, None).is_err());
        assert!(ConstantsLedger::with_overrides(None, None, Some(-1.0), None, None).is_err());
    }
}
