//! European call valuation, closed form and Monte Carlo.
//!
//! Both valuations are risk-neutral: the closed form is the standard
//! lognormal call price with volatility `sqrt(alpha)` and rate `r`, and the
//! Monte Carlo estimator simulates the terminal price under drift `r` (not
//! the physical drift `mu`) and discounts at `r`. That is the one convention
//! under which the discounted price is a martingale and the two valuations
//! estimate the same number; the physical drift stays available through the
//! strategy and martingale modules.
//!
//! Note the distinction maintained here: the exponential solution of the GBM
//! SDE (see [`crate::gbm`]) describes the asset itself, while the call-price
//! formula below values a claim on it. The two are related but not the same
//! object.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketParams;
use crate::par;
use crate::rng::path_stream;
use crate::stats::{mean, normal_cdf, pairwise_sum};

/// European call contract terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CallContract {
    /// Strike price, `>= 0`.
    pub strike: f64,
    /// Time to maturity in years, `> 0`.
    pub maturity: f64,
}

impl CallContract {
    /// Validated constructor.
    pub fn new(strike: f64, maturity: f64) -> Result<Self> {
        let c = Self { strike, maturity };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike >= 0.0) || !self.strike.is_finite() {
            return Err(Error::Params(format!(
                "strike must be >= 0 and finite, got {}",
                self.strike
            )));
        }
        if !(self.maturity > 0.0) || !self.maturity.is_finite() {
            return Err(Error::Params(format!(
                "maturity must be positive and finite, got {}",
                self.maturity
            )));
        }
        Ok(())
    }
}

/// A valuation result. Closed-form quotes report `std_error = 0` and
/// `n_paths = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceQuote {
    pub price: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// Which valuation produced the quote: "closed" or "mc".
    pub method: String,
}

/// Closed-form risk-neutral call value.
///
/// Degenerate corners are handled explicitly: a zero-strike call is the asset
/// itself (price `x0`), and at `alpha = 0` the terminal price is the
/// deterministic forward, so the value is `exp(-rT) max(x0 exp(rT) - K, 0)`.
pub fn bs_call_price(params: &MarketParams, contract: &CallContract) -> Result<PriceQuote> {
    params.validate()?;
    contract.validate()?;
    let (x0, alpha, r) = (params.x0, params.alpha, params.r);
    let (k, t) = (contract.strike, contract.maturity);
    let price = if k == 0.0 {
        x0
    } else if alpha == 0.0 {
        (-r * t).exp() * (x0 * (r * t).exp() - k).max(0.0)
    } else {
        let st = (alpha * t).sqrt();
        let d1 = ((x0 / k).ln() + (r + alpha / 2.0) * t) / st;
        let d2 = d1 - st;
        x0 * normal_cdf(d1) - k * (-r * t).exp() * normal_cdf(d2)
    };
    Ok(PriceQuote { price, std_error: 0.0, n_paths: 0, method: "closed".into() })
}

/// Monte Carlo risk-neutral call value over `n_paths` terminal samples.
///
/// `price = exp(-rT) mean(max(X_T - K, 0))` with
/// `X_T = x0 exp((r - alpha/2) T + sqrt(alpha T) Z)` and `Z` standard normal
/// from the per-path substream `(seed, p)`. The reported standard error is
/// `exp(-rT)` times the sample standard deviation of the payoff over
/// `sqrt(n_paths)`. Deterministic given the seed, independent of thread
/// count.
pub fn mc_call_price(
    params: &MarketParams,
    contract: &CallContract,
    n_paths: usize,
    seed: u64,
) -> Result<PriceQuote> {
    params.validate()?;
    contract.validate()?;
    if n_paths < 2 {
        return Err(Error::Domain(format!(
            "mc_call_price needs n_paths >= 2 for a variance estimate, got {n_paths}"
        )));
    }
    let (x0, alpha, r) = (params.x0, params.alpha, params.r);
    let (k, t) = (contract.strike, contract.maturity);
    let c = (r - alpha / 2.0) * t;
    let st = (alpha * t).sqrt();
    let payoffs = par::map_indexed(n_paths, |p| {
        let z = path_stream(seed, p as u64).next_normal();
        (x0 * (c + st * z).exp() - k).max(0.0)
    });
    let disc = (-r * t).exp();
    let m = mean(&payoffs);
    let devs: Vec<f64> = payoffs.iter().map(|v| (v - m) * (v - m)).collect();
    let var = pairwise_sum(&devs) / (n_paths - 1) as f64;
    Ok(PriceQuote {
        price: disc * m,
        std_error: disc * (var / n_paths as f64).sqrt(),
        n_paths,
        method: "mc".into(),
    })
}
