//! Analytic marginal densities of Brownian motion, used as verification
//! references for the sampled paths.

use crate::error::{Error, Result};

/// Density of standard Brownian motion at time `t`,
/// `(2 pi t)^{-1/2} exp(-x^2 / (2t))`, the fundamental solution of the heat
/// equation `u_t = u_xx / 2`.
pub fn heat_kernel(x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("heat_kernel needs t > 0, got {t}")));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("heat_kernel needs finite x, got {x}")));
    }
    Ok((2.0 * std::f64::consts::PI * t).sqrt().recip() * (-x * x / (2.0 * t)).exp())
}

/// Density of Brownian motion with velocity `c` at time `t`,
/// `(2 pi t)^{-1/2} exp(-(x - c t)^2 / (2t))`: the heat kernel recentred on
/// the drifted mean `c t`.
pub fn drifted_density(x: f64, t: f64, c: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("drifted_density needs t > 0, got {t}")));
    }
    if !x.is_finite() || !c.is_finite() {
        return Err(Error::Domain("drifted_density needs finite x and c".into()));
    }
    let d = x - c * t;
    Ok((2.0 * std::f64::consts::PI * t).sqrt().recip() * (-d * d / (2.0 * t)).exp())
}
