//! Market model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the price model `dX = mu X dt + sqrt(alpha) X dB` plus the
/// flat interest rate used for the bond and for discounting.
///
/// `alpha` is a variance rate: the diffusion coefficient of the SDE is
/// `sqrt(alpha)`, so the conventional volatility satisfies `sigma^2 = alpha`.
/// Conversions are the caller's concern; every interface in this crate speaks
/// `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Initial price `X_0 > 0`.
    pub x0: f64,
    /// Mean income rate per year.
    pub mu: f64,
    /// Variance rate per year, `>= 0`.
    pub alpha: f64,
    /// Interest rate per year, `>= 0`.
    pub r: f64,
}

impl MarketParams {
    /// Validated constructor.
    pub fn new(x0: f64, mu: f64, alpha: f64, r: f64) -> Result<Self> {
        let params = Self { x0, mu, alpha, r };
        params.validate()?;
        Ok(params)
    }

    /// Checks the invariants; useful after deserialization or field edits.
    pub fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0) || !self.x0.is_finite() {
            return Err(Error::Params(format!("x0 must be positive and finite, got {}", self.x0)));
        }
        if !self.mu.is_finite() {
            return Err(Error::Params(format!("mu must be finite, got {}", self.mu)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Params(format!(
                "alpha must be >= 0 and finite, got {}",
                self.alpha
            )));
        }
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(Error::Params(format!("r must be >= 0 and finite, got {}", self.r)));
        }
        Ok(())
    }

    /// Velocity of the log price, `c = mu - alpha/2`.
    ///
    /// This is the exponent rate in the strong solution
    /// `X_t = x0 exp(c t + sqrt(alpha) B_t)`; see the math notes for the
    /// derivation via the Ito formula.
    pub fn velocity(&self) -> f64 {
        self.mu - self.alpha / 2.0
    }
}
