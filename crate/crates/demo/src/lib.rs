//! WebAssembly bindings for the browser playground.
//!
//! Each export takes plain numbers, runs the corresponding library pipeline,
//! and returns a JSON string for the page to plot. Inputs are clamped to
//! sizes a browser tab handles comfortably; domain errors surface as thrown
//! `Error` values carrying the library's own messages.
//!
//! The exported wrappers only translate errors. The `*_json` functions do
//! the work and stay callable from native tests, where `JsError` cannot be
//! constructed.

// exports take flat scalar signatures; JS callers have no structs to pass
#![allow(clippy::too_many_arguments)]
// validation deliberately writes `!(x > y)` so NaN fails closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use martopt::market::MarketParams;
use martopt::pricing::{bs_call_price, mc_call_price, CallContract};
use martopt::{
    adaptive_optimize, sample_brownian, simulate_gbm_euler, simulate_gbm_exact, Error, Result,
    TimeGrid,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_PATHS: usize = 20_000;
const MAX_STEPS: usize = 512;

fn clamp(n: u32, max: usize) -> usize {
    (n as usize).min(max).max(1)
}

#[derive(Serialize)]
struct PathsOut {
    times: Vec<f64>,
    paths: Vec<Vec<f64>>,
}

fn paths_json(
    x0: f64,
    mu: f64,
    alpha: f64,
    horizon: f64,
    n_steps: u32,
    n_paths: u32,
    seed: u64,
    scheme: &str,
) -> Result<String> {
    let params = MarketParams::new(x0, mu, alpha, 0.0)?;
    let grid = TimeGrid::uniform(horizon, clamp(n_steps, MAX_STEPS))?;
    let brownian = sample_brownian(&grid, clamp(n_paths, 200), seed)?;
    let prices = match scheme {
        "exact" => simulate_gbm_exact(&params, &brownian)?,
        "euler" => simulate_gbm_euler(&params, &brownian)?,
        other => return Err(Error::Domain(format!("unknown scheme {other:?}"))),
    };
    let out = PathsOut {
        times: grid.times().to_vec(),
        paths: (0..prices.n_paths()).map(|p| prices.path(p).to_vec()).collect(),
    };
    Ok(serde_json::to_string(&out)?)
}

#[derive(Serialize)]
struct CurvePoint {
    strike: f64,
    closed: f64,
    mc: f64,
    se: f64,
}

fn curve_json(
    x0: f64,
    alpha: f64,
    rate: f64,
    maturity: f64,
    strike_lo: f64,
    strike_hi: f64,
    n_strikes: u32,
    n_paths: u32,
    seed: u64,
) -> Result<String> {
    if !(strike_hi > strike_lo) {
        return Err(Error::Domain(format!(
            "strike range must satisfy lo < hi, got [{strike_lo}, {strike_hi}]"
        )));
    }
    let market = MarketParams::new(x0, rate, alpha, rate)?;
    let n_strikes = clamp(n_strikes, 200);
    let n_paths = clamp(n_paths, MAX_PATHS);
    let mut points = Vec::with_capacity(n_strikes);
    for i in 0..n_strikes {
        let frac = if n_strikes == 1 { 0.0 } else { i as f64 / (n_strikes - 1) as f64 };
        let strike = strike_lo + (strike_hi - strike_lo) * frac;
        let contract = CallContract::new(strike, maturity)?;
        let closed = bs_call_price(&market, &contract)?;
        let mc = mc_call_price(&market, &contract, n_paths, seed)?;
        points.push(CurvePoint { strike, closed: closed.price, mc: mc.price, se: mc.std_error });
    }
    Ok(serde_json::to_string(&points)?)
}

#[derive(Serialize)]
struct OptimizeOut {
    converged: bool,
    iterations: usize,
    epsilon: f64,
    theta_history: Vec<f64>,
    defect_history: Vec<f64>,
    defect_by_index: Vec<f64>,
    theta_target: f64,
}

fn optimize_json(
    x0: f64,
    mu: f64,
    alpha: f64,
    rate: f64,
    horizon: f64,
    n_steps: u32,
    n_paths: u32,
    seed: u64,
    epsilon: f64,
    max_iter: u32,
) -> Result<String> {
    let params = MarketParams::new(x0, mu, alpha, rate)?;
    let grid = TimeGrid::uniform(horizon, clamp(n_steps, 64))?;
    let report = adaptive_optimize(
        &params,
        &grid,
        clamp(n_paths, MAX_PATHS),
        seed,
        &Default::default(),
        epsilon,
        clamp(max_iter, 50),
    )?;
    let out = OptimizeOut {
        converged: report.converged,
        iterations: report.iterations,
        epsilon: report.epsilon,
        theta_history: report.theta_history,
        defect_history: report.max_defect_history,
        defect_by_index: report.defect_by_index,
        theta_target: if alpha > 0.0 { (mu - rate) / alpha.sqrt() } else { 0.0 },
    };
    Ok(serde_json::to_string(&out)?)
}

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Simulates GBM price paths and returns `{times, paths}`.
///
/// `scheme` is `"exact"` or `"euler"`; anything else is rejected.
#[wasm_bindgen]
pub fn simulate_paths(
    x0: f64,
    mu: f64,
    alpha: f64,
    horizon: f64,
    n_steps: u32,
    n_paths: u32,
    seed: u64,
    scheme: &str,
) -> std::result::Result<String, JsError> {
    paths_json(x0, mu, alpha, horizon, n_steps, n_paths, seed, scheme).map_err(js_err)
}

/// Prices a call across a strike sweep, closed form next to Monte Carlo,
/// and returns `[{strike, closed, mc, se}]`. The same seed prices every
/// strike, so the sampling error moves the curve coherently instead of
/// adding point-by-point jitter.
#[wasm_bindgen]
pub fn price_curve(
    x0: f64,
    alpha: f64,
    rate: f64,
    maturity: f64,
    strike_lo: f64,
    strike_hi: f64,
    n_strikes: u32,
    n_paths: u32,
    seed: u64,
) -> std::result::Result<String, JsError> {
    curve_json(x0, alpha, rate, maturity, strike_lo, strike_hi, n_strikes, n_paths, seed)
        .map_err(js_err)
}

/// Runs the drift-shift optimizer and returns the iteration trace together
/// with the closed-form target `(mu - r) / sqrt(alpha)` for the overlay line.
#[wasm_bindgen]
pub fn optimize_drift(
    x0: f64,
    mu: f64,
    alpha: f64,
    rate: f64,
    horizon: f64,
    n_steps: u32,
    n_paths: u32,
    seed: u64,
    epsilon: f64,
    max_iter: u32,
) -> std::result::Result<String, JsError> {
    optimize_json(x0, mu, alpha, rate, horizon, n_steps, n_paths, seed, epsilon, max_iter)
        .map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_paths_emits_the_grid_and_all_paths() {
        let json = paths_json(100.0, 0.08, 0.04, 1.0, 16, 10, 5, "exact").unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["times"].as_array().unwrap().len(), 17);
        assert_eq!(v["paths"].as_array().unwrap().len(), 10);
    }

    #[test]
    fn price_curve_brackets_the_closed_form() {
        let json = curve_json(100.0, 0.04, 0.05, 1.0, 80.0, 120.0, 9, 20_000, 7).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for point in v.as_array().unwrap() {
            let gap = (point["closed"].as_f64().unwrap() - point["mc"].as_f64().unwrap()).abs();
            assert!(gap <= 4.0 * point["se"].as_f64().unwrap());
        }
    }

    #[test]
    fn optimize_drift_reports_a_trace() {
        let json = optimize_json(100.0, 0.10, 0.04, 0.05, 2.0, 2, 20_000, 6, 0.01, 20).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["converged"].as_bool().unwrap());
        let thetas = v["theta_history"].as_array().unwrap();
        assert_eq!(thetas.len(), v["defect_history"].as_array().unwrap().len());
        assert!((v["theta_target"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bad_scheme_is_rejected() {
        assert!(paths_json(100.0, 0.08, 0.04, 1.0, 16, 10, 5, "milstein").is_err());
    }
}
