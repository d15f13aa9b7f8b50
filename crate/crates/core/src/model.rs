//! Waveguide parameters and regime classification.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the integer test on `α₀d/π` used by [`classify_regime`].
pub const FORBIDDEN_RTOL: f64 = 1e-12;

/// Absolute margin on `α₀d/π` below which the transverse modes are refused.
///
/// `A_j` blows up as `μ_j² → α₀²`, so every mode-level computation treats
/// `|α₀d/π − n| < FORBIDDEN_MARGIN` (n ≠ 0) as forbidden.
pub const FORBIDDEN_MARGIN: f64 = 1e-8;

/// Strip width `d` and background boundary coupling `α₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideParams {
    pub d: f64,
    pub alpha0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `α₀ = 0`: the Neumann Laplacian.
    Neumann,
    /// `0 < |α₀| < π/d`: threshold `μ₀² = α₀²`.
    Subcritical,
    /// `|α₀| > π/d`: threshold `μ₀² = π²/d²`.
    Supercritical,
    /// `α₀d/π ∈ ℤ∖{0}`.
    Forbidden,
}

impl WaveguideParams {
    pub fn new(d: f64, alpha0: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidParams(format!("strip width must be positive, got {d}")));
        }
        if !alpha0.is_finite() {
            return Err(Error::InvalidParams(format!("alpha0 must be finite, got {alpha0}")));
        }
        Ok(Self { d, alpha0 })
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self)
    }

    /// `α₀d/π`.
    pub fn coupling_ratio(&self) -> f64 {
        self.alpha0 * self.d / PI
    }

    /// `π/d`, the first Dirichlet/Neumann transverse frequency.
    pub fn pi_over_d(&self) -> f64 {
        PI / self.d
    }

    /// Fails unless the parameters are safely away from the forbidden set.
    pub fn ensure_admissible(&self) -> Result<Regime> {
        let ratio = self.coupling_ratio();
        let n = ratio.round();
        if n != 0.0 && (ratio - n).abs() < FORBIDDEN_MARGIN.max(FORBIDDEN_RTOL * ratio.abs()) {
            return Err(Error::Regime { ratio });
        }
        match self.regime() {
            Regime::Forbidden => Err(Error::Regime { ratio }),
            r => Ok(r),
        }
    }

    /// Bottom of the essential spectrum, `μ₀²`.
    pub fn threshold(&self) -> Result<f64> {
        let mu0 = crate::transverse::mu_j(self, 0)?;
        Ok(mu0 * mu0)
    }
}

/// Classifies `(α₀, d)` into the four regimes.
///
/// The forbidden test is an integer test on `α₀d/π` with relative tolerance
/// [`FORBIDDEN_RTOL`]; everything else is a plain comparison.
pub fn classify_regime(params: &WaveguideParams) -> Regime {
    let ratio = params.coupling_ratio();
    if params.alpha0 == 0.0 {
        return Regime::Neumann;
    }
    let n = ratio.round();
    if n != 0.0 && (ratio - n).abs() <= FORBIDDEN_RTOL * ratio.abs() {
        return Regime::Forbidden;
    }
    if params.alpha0.abs() < PI / params.d {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: f64, a: f64) -> WaveguideParams {
        WaveguideParams::new(d, a).unwrap()
    }

    #[test]
    fn regimes_on_unit_pi_strip() {
        assert_eq!(classify_regime(&p(PI, 0.5)), Regime::Subcritical);
        assert_eq!(classify_regime(&p(PI, -0.5)), Regime::Subcritical);
        assert_eq!(classify_regime(&p(PI, 0.0)), Regime::Neumann);
        assert_eq!(classify_regime(&p(PI, 2.5)), Regime::Supercritical);
        // α₀d/π = 2 violates the non-integrality hypothesis
        assert_eq!(classify_regime(&p(PI, 2.0)), Regime::Forbidden);
        assert_eq!(classify_regime(&p(PI, 1.0)), Regime::Forbidden);
        assert_eq!(classify_regime(&p(PI, -3.0)), Regime::Forbidden);
    }

    #[test]
    fn forbidden_uses_relative_integer_test() {
        let d = 2.0;
        let a = PI / d * 2.0;
        assert_eq!(classify_regime(&p(d, a)), Regime::Forbidden);
        assert_eq!(classify_regime(&p(d, a * (1.0 + 1e-9))), Regime::Supercritical);
        // inside the mode-level safety margin but outside the classification tolerance
        assert!(p(d, a * (1.0 + 1e-10)).ensure_admissible().is_err());
    }

    #[test]
    fn rejects_bad_width() {
        assert!(WaveguideParams::new(0.0, 1.0).is_err());
        assert!(WaveguideParams::new(-1.0, 1.0).is_err());
        assert!(WaveguideParams::new(f64::NAN, 1.0).is_err());
    }
}
