//! System parameters and their validation.
//!
//! The tuple (N, a, b, p, q, s) describes the radial system
//!
//! ```text
//!   u'' + (N-1)/r u' = r^a v^p
//!   v'' + (N-1)/r v' = r^b v^q (u')^s
//! ```
//!
//! and is the single source of truth for every closed-form quantity in this
//! crate. Construction goes through [`SystemParams::new`], which enforces the
//! standing hypotheses (N >= 2, p, q > 0, a, b >= 0, s >= 1) together with the
//! guard 2p - q + 1 > 0 needed by the boundary-classification integrals.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Validated parameters of the radial system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Space dimension N >= 2.
    pub n: u32,
    /// Weight exponent of the u-equation, a >= 0.
    pub a: f64,
    /// Weight exponent of the v-equation, b >= 0.
    pub b: f64,
    /// Exponent of v in the u-equation, p > 0.
    pub p: f64,
    /// Exponent of v in the v-equation, q > 0.
    pub q: f64,
    /// Gradient exponent, s >= 1 (the nonlinearity f(t) = t^s).
    pub s: f64,
}

impl SystemParams {
    /// Validates the raw tuple and returns the parameter set, or a precise
    /// violation report.
    pub fn new(n: u32, a: f64, b: f64, p: f64, q: f64, s: f64) -> Result<Self> {
        for (name, value) in [("a", a), ("b", b), ("p", p), ("q", q), ("s", s)] {
            if !value.is_finite() {
                return Err(Error::NonFiniteParameter { name, value });
            }
        }
        if n < 2 {
            return Err(Error::DimensionTooSmall { n });
        }
        if p <= 0.0 {
            return Err(Error::NonPositiveExponent { name: "p", value: p });
        }
        if q <= 0.0 {
            return Err(Error::NonPositiveExponent { name: "q", value: q });
        }
        if a < 0.0 {
            return Err(Error::NegativeWeight { name: "a", value: a });
        }
        if b < 0.0 {
            return Err(Error::NegativeWeight { name: "b", value: b });
        }
        if s < 1.0 {
            return Err(Error::GradientExponentTooSmall { value: s });
        }
        let guard = 2.0 * p - q + 1.0;
        if guard <= 0.0 {
            return Err(Error::GuardViolation { value: guard });
        }
        Ok(Self { n, a, b, p, q, s })
    }

    /// Dimension as a float, for use in formulas.
    #[inline]
    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    /// ps + q, the exponent sum deciding global existence (<= 1) and the
    /// asymptotic regime (< 1).
    #[inline]
    pub fn ps_q(&self) -> f64 {
        self.p * self.s + self.q
    }

    /// The guard quantity 2p - q + 1 (positive for validated parameters).
    #[inline]
    pub fn guard(&self) -> f64 {
        2.0 * self.p - self.q + 1.0
    }

    /// N + s(a+1) + b, the lower phase bound of W and the startup divisor of
    /// v' near the origin.
    #[inline]
    pub fn ell(&self) -> f64 {
        self.nf() + self.s * (self.a + 1.0) + self.b
    }

    /// True when the asymptotic-rate hypotheses p < 1 and ps + q < 1 hold.
    #[inline]
    pub fn satisfies_rate_hypotheses(&self) -> bool {
        self.p < 1.0 && self.ps_q() < 1.0
    }

    /// Errors out unless p < 1 and ps + q < 1.
    pub fn require_rate_hypotheses(&self) -> Result<()> {
        if !self.satisfies_rate_hypotheses() {
            return Err(Error::HypothesisViolated {
                what: format!("need p < 1 and ps + q < 1, got p = {}, ps + q = {}", self.p, self.ps_q()),
            });
        }
        Ok(())
    }
}
