//! Conditional expectations, martingale defects, and the adaptive drift-shift
//! optimizer.
//!
//! The pipeline: estimate `E[Y_{i+1} | F_i]` cross-sectionally on a simulated
//! ensemble, measure how far the discounted price is from a martingale, and,
//! if asked, adjust a scalar drift shift until that defect falls below a
//! tolerance. The shift is the Girsanov parameter theta, acting on the drift
//! as `mu -> mu - sqrt(alpha) theta`; it is the minimal deformation that
//! stays inside the GBM family and has the closed-form martingale point
//! `theta* = (mu - r) / sqrt(alpha)`, which makes the optimizer testable
//! against an analytic target.
//!
//! Defects are measured on the discounted process `Y_i = exp(-r t_i) X_i`.
//! Undiscounted GBM is a martingale only at zero drift, so testing `X`
//! directly would be useless for pricing; the raw variant remains available
//! through [`adaptive_optimize_undiscounted`] and the `discount_rate`
//! argument of [`martingale_defect`]. Adjacent index pairs `(i, i+1)` are the
//! only ones measured: by the tower property the adjacent defects vanish if
//! and only if all pairwise defects do, and adjacent estimation has the least
//! variance.
//!
//! "Almost everywhere" convergence is unattainable on a finite sample; the
//! empirical surrogate is the mean absolute cross-sectional deviation scaled
//! by the initial price level.

use serde::{Deserialize, Serialize};

use crate::ensemble::{PathEnsemble, PathKind};
use crate::error::{Error, Result};
use crate::gbm::{sample_brownian, simulate_gbm_exact};
use crate::grid::TimeGrid;
use crate::market::MarketParams;
use crate::par;
use crate::rng::{mix64, path_stream};
use crate::stats::{mean, pairwise_sum, polynomial_fit};

/// Hard ceiling on the regression basis degree; beyond this the standardized
/// Vandermonde design is too ill conditioned to trust.
pub const MAX_BASIS_DEGREE: usize = 10;

/// Smallest admissible inner-sample size for nested Monte Carlo.
pub const MIN_INNER_PATHS: usize = 16;

/// Conditional-expectation estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum CondExp {
    /// Cross-sectional least squares of the target on a polynomial basis in
    /// the standardized conditioning state (the price at the conditioning
    /// time). Degree 3 by default.
    Regression { degree: usize },
    /// Per-path resimulation: from each path's state, draw `n_inner`
    /// sub-paths of the given market to the target time and average. The
    /// sub-streams derive from `seed` and the outer path index.
    NestedMc { n_inner: usize, market: MarketParams, seed: u64 },
}

impl CondExp {
    /// Regression estimator with the given basis degree.
    pub fn regression(degree: usize) -> Result<Self> {
        let est = CondExp::Regression { degree };
        est.validate()?;
        Ok(est)
    }

    /// Nested Monte Carlo estimator resimulating `market`.
    pub fn nested_mc(n_inner: usize, market: MarketParams, seed: u64) -> Result<Self> {
        let est = CondExp::NestedMc { n_inner, market, seed };
        est.validate()?;
        Ok(est)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CondExp::Regression { degree } => {
                if *degree > MAX_BASIS_DEGREE {
                    return Err(Error::Params(format!(
                        "basis degree {degree} exceeds the conditioning guard {MAX_BASIS_DEGREE}"
                    )));
                }
            }
            CondExp::NestedMc { n_inner, market, .. } => {
                if *n_inner < MIN_INNER_PATHS {
                    return Err(Error::Params(format!(
                        "nested mc needs at least {MIN_INNER_PATHS} inner paths, got {n_inner}"
                    )));
                }
                market.validate()?;
            }
        }
        Ok(())
    }
}

impl Default for CondExp {
    fn default() -> Self {
        CondExp::Regression { degree: 3 }
    }
}

/// Outcome of a defect measurement or an optimizer run.
///
/// `defect_by_index` holds one entry per adjacent pair, indexed by the left
/// time index; `max_defect` is its maximum. For a plain measurement
/// `theta_history` is empty and `iterations` is 0. For an optimizer run the
/// defects describe the final iteration, `theta_history` lists the shift used
/// at each iteration (starting at 0), and `max_defect_history` the resulting
/// per-iteration defect (carried alongside the serialized envelope for the
/// per-iteration CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub epsilon: f64,
    pub converged: bool,
    pub iterations: usize,
    pub max_defect: f64,
    pub defect_by_index: Vec<f64>,
    pub theta_history: Vec<f64>,
    #[serde(skip)]
    pub max_defect_history: Vec<f64>,
}

/// Per-path estimates of `E[values[m_idx] | F_{n_idx}]`.
///
/// `m_idx = n_idx` returns the observed column itself (the tower base case).
/// The regression estimator conditions on the value at `n_idx` alone and
/// falls back to lower degrees, with a warning, if the design is rank
/// deficient at the requested one; a constant conditioning state (for
/// example at index 0, where every path starts at the same point) yields the
/// cross-sectional mean, which is the exact conditional expectation for a
/// trivial sigma-algebra. Nested Monte Carlo requires a price ensemble since
/// it resimulates the price dynamics.
pub fn conditional_expectation(
    ensemble: &PathEnsemble,
    n_idx: usize,
    m_idx: usize,
    est: &CondExp,
) -> Result<Vec<f64>> {
    est.validate()?;
    let last = ensemble.n_times() - 1;
    if n_idx > last || m_idx > last {
        return Err(Error::Domain(format!(
            "time index out of range: conditioning {n_idx}, target {m_idx}, last {last}"
        )));
    }
    if n_idx > m_idx {
        return Err(Error::Domain(format!(
            "conditioning index {n_idx} must not exceed target index {m_idx}"
        )));
    }
    if n_idx == m_idx {
        return Ok(ensemble.column(n_idx));
    }
    match est {
        CondExp::Regression { degree } => {
            let x = ensemble.column(n_idx);
            let y = ensemble.column(m_idx);
            let mut d = *degree;
            let fit = loop {
                match polynomial_fit(&x, &y, d)? {
                    Some(fit) => break fit,
                    None => {
                        log::warn!(
                            "regression design rank-deficient at degree {d} (conditioning index {n_idx}); retrying at degree {}",
                            d - 1
                        );
                        d -= 1;
                    }
                }
            };
            Ok(par::map_indexed(x.len(), |p| fit.eval(x[p])))
        }
        CondExp::NestedMc { n_inner, market, seed } => {
            ensemble.expect_kind(PathKind::Price)?;
            let dt = ensemble.grid().times()[m_idx] - ensemble.grid().times()[n_idx];
            let c = market.velocity() * dt;
            let s = (market.alpha * dt).sqrt();
            let n_inner = *n_inner;
            let seed = *seed;
            let x = ensemble.column(n_idx);
            Ok(par::map_indexed(x.len(), |p| {
                let inner_master = mix64(seed ^ mix64(p as u64));
                let samples: Vec<f64> = (0..n_inner)
                    .map(|j| {
                        let z = path_stream(inner_master, j as u64).next_normal();
                        x[p] * (c + s * z).exp()
                    })
                    .collect();
                pairwise_sum(&samples) / n_inner as f64
            }))
        }
    }
}

/// Defect of one adjacent pair plus the discounted cross-sectional sums the
/// optimizer reads its implied drift from.
struct PairMeasurement {
    defect: f64,
    fitted_sum: f64,
    current_sum: f64,
}

fn measure_pairs(
    ensemble: &PathEnsemble,
    discount_rate: f64,
    est: &CondExp,
) -> Result<(Vec<PairMeasurement>, f64)> {
    ensemble.expect_kind(PathKind::Price)?;
    if ensemble.n_times() < 2 {
        return Err(Error::Domain("martingale defect needs at least 2 time points".into()));
    }
    if !discount_rate.is_finite() || discount_rate < 0.0 {
        return Err(Error::Domain(format!(
            "discount rate must be finite and >= 0, got {discount_rate}"
        )));
    }
    let times = ensemble.grid().times();
    let scale = mean(&ensemble.column(0));
    let mut pairs = Vec::with_capacity(ensemble.n_times() - 1);
    for i in 0..ensemble.n_times() - 1 {
        let fitted = conditional_expectation(ensemble, i, i + 1, est)?;
        let disc_here = (-discount_rate * times[i]).exp();
        let disc_next = (-discount_rate * times[i + 1]).exp();
        let current = ensemble.column(i);
        let devs: Vec<f64> = fitted
            .iter()
            .zip(&current)
            .map(|(f, x)| (disc_next * f - disc_here * x).abs())
            .collect();
        let fitted_disc: Vec<f64> = fitted.iter().map(|f| disc_next * f).collect();
        let current_disc: Vec<f64> = current.iter().map(|x| disc_here * x).collect();
        pairs.push(PairMeasurement {
            defect: mean(&devs) / scale,
            fitted_sum: pairwise_sum(&fitted_disc),
            current_sum: pairwise_sum(&current_disc),
        });
    }
    Ok((pairs, scale))
}

fn report_from_pairs(pairs: &[PairMeasurement], epsilon: f64) -> (Vec<f64>, f64, bool) {
    let defects: Vec<f64> = pairs.iter().map(|p| p.defect).collect();
    let max_defect = defects.iter().fold(0.0f64, |a, d| a.max(*d));
    (defects, max_defect, max_defect < epsilon)
}

/// Measures the martingale defect of a discounted price ensemble.
///
/// For each adjacent pair the defect is the cross-sectional mean of
/// `|E_hat[Y_{i+1} | F_i] - Y_i|` over paths, scaled by the initial price
/// level, with `Y_i = exp(-discount_rate t_i) X_i`. Pass `discount_rate = 0`
/// to test the raw process. No optimization is performed: `theta_history`
/// comes back empty.
pub fn martingale_defect(
    ensemble: &PathEnsemble,
    discount_rate: f64,
    est: &CondExp,
    epsilon: f64,
) -> Result<MartingaleReport> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let (pairs, _) = measure_pairs(ensemble, discount_rate, est)?;
    let (defect_by_index, max_defect, converged) = report_from_pairs(&pairs, epsilon);
    Ok(MartingaleReport {
        epsilon,
        converged,
        iterations: 0,
        max_defect,
        defect_by_index,
        theta_history: Vec::new(),
        max_defect_history: Vec::new(),
    })
}

/// Optimizer knobs beyond the convergence pair `(epsilon, max_iter)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    /// Stop when the max defect falls below this.
    pub epsilon: f64,
    /// Iteration budget; exhausting it is reported, not thrown.
    pub max_iter: usize,
    /// Step damping in (0, 1]. 1 jumps straight to the implied shift; the
    /// 0.8 default trades a little speed for monotone approach.
    pub damping: f64,
    /// Measure defects on `exp(-r t) X` (true) or on `X` itself (false).
    pub discounted: bool,
}

/// Default damping factor for the drift-shift update.
pub const DEFAULT_DAMPING: f64 = 0.8;

impl OptimizerSettings {
    pub fn new(epsilon: f64, max_iter: usize) -> Self {
        Self { epsilon, max_iter, damping: DEFAULT_DAMPING, discounted: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Domain(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }
}

/// Repeat-until-epsilon drift calibration with default damping, discounted.
///
/// Simulates GBM under the shifted drift `mu_k = mu - sqrt(alpha) theta_k`,
/// measures the martingale defect of the discounted process, and moves theta
/// by `damping * (mu_hat_k - r) / sqrt(alpha)`, where `mu_hat_k` is the drift
/// implied by the estimated conditional expectations. All iterations reuse
/// one Brownian ensemble (common random numbers), so the run is a
/// deterministic function of the seed and converges monotonically up to
/// estimator noise. On success the last `theta_history` entry is the
/// recovered Girsanov shift.
///
/// Zero diffusion leaves nothing to optimize: if `mu` already equals the
/// target rate the single defect evaluation settles it, otherwise the run
/// fails with [`Error::DegenerateDiffusion`]. An exhausted iteration budget
/// returns a `converged = false` report rather than an error.
pub fn adaptive_optimize(
    params: &MarketParams,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    est: &CondExp,
    epsilon: f64,
    max_iter: usize,
) -> Result<MartingaleReport> {
    adaptive_optimize_with(
        params,
        grid,
        n_paths,
        seed,
        est,
        OptimizerSettings::new(epsilon, max_iter),
    )
}

/// [`adaptive_optimize`] without discounting: the defect is measured on `X`
/// itself and the drift is driven toward 0 instead of `r`.
pub fn adaptive_optimize_undiscounted(
    params: &MarketParams,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    est: &CondExp,
    epsilon: f64,
    max_iter: usize,
) -> Result<MartingaleReport> {
    let mut settings = OptimizerSettings::new(epsilon, max_iter);
    settings.discounted = false;
    adaptive_optimize_with(params, grid, n_paths, seed, est, settings)
}

/// Fully configurable optimizer entry point.
pub fn adaptive_optimize_with(
    params: &MarketParams,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
    est: &CondExp,
    settings: OptimizerSettings,
) -> Result<MartingaleReport> {
    params.validate()?;
    est.validate()?;
    settings.validate()?;
    let rho = if settings.discounted { params.r } else { 0.0 };
    let discount_rate = rho;

    if params.alpha == 0.0 {
        if params.mu != rho {
            return Err(Error::DegenerateDiffusion { mu: params.mu, rho });
        }
        // the shift family collapses to a point; one measurement decides
        let brownian = sample_brownian(grid, n_paths, seed)?;
        let prices = simulate_gbm_exact(params, &brownian)?;
        let (pairs, _) = measure_pairs(&prices, discount_rate, est)?;
        let (defect_by_index, max_defect, converged) = report_from_pairs(&pairs, settings.epsilon);
        return Ok(MartingaleReport {
            epsilon: settings.epsilon,
            converged,
            iterations: 1,
            max_defect,
            defect_by_index: defect_by_index.clone(),
            theta_history: vec![0.0],
            max_defect_history: vec![max_defect],
        });
    }

    let sa = params.alpha.sqrt();
    let horizon = grid.horizon();
    // common random numbers: every iteration maps the same Brownian ensemble
    let brownian = sample_brownian(grid, n_paths, seed)?;

    let mut theta = 0.0f64;
    let mut theta_history = Vec::new();
    let mut max_defect_history = Vec::new();
    let mut last_defects = Vec::new();
    let mut last_max = f64::INFINITY;

    for _ in 0..settings.max_iter {
        let shifted = MarketParams { mu: params.mu - sa * theta, ..*params };
        let est_k = match est {
            CondExp::Regression { .. } => est.clone(),
            CondExp::NestedMc { n_inner, seed: est_seed, .. } => {
                CondExp::NestedMc { n_inner: *n_inner, market: shifted, seed: *est_seed }
            }
        };
        let prices = simulate_gbm_exact(&shifted, &brownian)?;
        let (pairs, _) = measure_pairs(&prices, discount_rate, &est_k)?;
        let (defects, max_defect, converged) = report_from_pairs(&pairs, settings.epsilon);
        theta_history.push(theta);
        max_defect_history.push(max_defect);
        last_defects = defects;
        last_max = max_defect;
        if converged {
            return Ok(MartingaleReport {
                epsilon: settings.epsilon,
                converged: true,
                iterations: theta_history.len(),
                max_defect,
                defect_by_index: last_defects,
                theta_history,
                max_defect_history,
            });
        }
        // implied drift of the discounted ensemble: sum over pairs of the log
        // ratio of fitted to current cross-sectional totals spans exp((mu_hat - rho) T)
        let mut log_growth = 0.0;
        for pair in &pairs {
            if !(pair.fitted_sum > 0.0 && pair.current_sum > 0.0) {
                return Err(Error::Domain(
                    "implied drift undefined: non-positive cross-sectional totals".into(),
                ));
            }
            log_growth += (pair.fitted_sum / pair.current_sum).ln();
        }
        let drift_gap = log_growth / horizon; // = mu_hat - rho
        theta += settings.damping * drift_gap / sa;
    }

    Ok(MartingaleReport {
        epsilon: settings.epsilon,
        converged: false,
        iterations: theta_history.len(),
        max_defect: last_max,
        defect_by_index: last_defects,
        theta_history,
        max_defect_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn market() -> MarketParams {
        MarketParams::new(100.0, 0.10, 0.04, 0.05).unwrap()
    }

    fn price_ensemble(
        params: &MarketParams,
        t: f64,
        n_steps: usize,
        n_paths: usize,
        seed: u64,
    ) -> PathEnsemble {
        let grid = TimeGrid::uniform(t, n_steps).unwrap();
        let b = sample_brownian(&grid, n_paths, seed).unwrap();
        simulate_gbm_exact(params, &b).unwrap()
    }

    #[test]
    fn equal_indices_return_the_observed_column() {
        let ens = price_ensemble(&market(), 1.0, 4, 200, 5);
        let est = CondExp::default();
        let got = conditional_expectation(&ens, 2, 2, &est).unwrap();
        assert_eq!(got, ens.column(2));
    }

    #[test]
    fn reversed_indices_are_usage_errors() {
        let ens = price_ensemble(&market(), 1.0, 4, 50, 5);
        let est = CondExp::default();
        assert!(conditional_expectation(&ens, 3, 2, &est).is_err());
        assert!(conditional_expectation(&ens, 0, 9, &est).is_err());
    }

    #[test]
    fn zero_alpha_conditional_expectation_is_deterministic() {
        let params = MarketParams::new(50.0, 0.08, 0.0, 0.02).unwrap();
        let ens = price_ensemble(&params, 1.0, 4, 100, 5);
        let expected = ens.path(0)[3]; // all paths identical
        for est in [CondExp::default(), CondExp::nested_mc(64, params, 11).unwrap()] {
            let got = conditional_expectation(&ens, 1, 3, &est).unwrap();
            for v in got {
                assert!((v - expected).abs() <= 1e-12 * expected);
            }
        }
    }

    #[test]
    fn estimator_guards() {
        assert!(CondExp::regression(10).is_ok());
        assert!(CondExp::regression(11).is_err());
        assert!(CondExp::nested_mc(16, market(), 1).is_ok());
        assert!(CondExp::nested_mc(15, market(), 1).is_err());
    }

    #[test]
    fn defect_requires_two_time_points() {
        let grid = TimeGrid::new(vec![0.0]).unwrap();
        let ens =
            PathEnsemble::from_values(PathKind::Price, 1, grid, vec![vec![100.0]; 4]).unwrap();
        assert!(martingale_defect(&ens, 0.05, &CondExp::default(), 0.01).is_err());
    }

    #[test]
    fn defect_requires_positive_epsilon_and_sane_rate() {
        let ens = price_ensemble(&market(), 1.0, 2, 64, 5);
        assert!(martingale_defect(&ens, 0.05, &CondExp::default(), 0.0).is_err());
        assert!(martingale_defect(&ens, -0.01, &CondExp::default(), 0.01).is_err());
    }

    #[test]
    fn deterministic_degenerate_market_defect_is_rounding_level() {
        // alpha = 0, mu = r: Y_i = exp(-r t) x0 exp(r t) is constant up to the
        // rounding of the two exponentials, so the defect sits at ~1e-16
        // rather than exactly 0
        let params = MarketParams::new(100.0, 0.05, 0.0, 0.05).unwrap();
        let ens = price_ensemble(&params, 1.0, 4, 64, 5);
        let report = martingale_defect(&ens, 0.05, &CondExp::default(), 1e-6).unwrap();
        assert!(report.max_defect <= 1e-15, "max defect {}", report.max_defect);
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        assert!(report.theta_history.is_empty());
    }

    #[test]
    fn degenerate_diffusion_with_drift_gap_errors() {
        let params = MarketParams::new(100.0, 0.10, 0.0, 0.05).unwrap();
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let err =
            adaptive_optimize(&params, &grid, 64, 3, &CondExp::default(), 0.005, 10).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("no drift shift can restore the martingale property"), "{msg}");
    }

    #[test]
    fn degenerate_diffusion_at_target_rate_converges_trivially() {
        let params = MarketParams::new(100.0, 0.05, 0.0, 0.05).unwrap();
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let report =
            adaptive_optimize(&params, &grid, 64, 3, &CondExp::default(), 0.005, 10).unwrap();
        assert!(report.converged);
        assert_eq!(report.theta_history, vec![0.0]);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn exhausted_budget_reports_instead_of_failing() {
        let report = adaptive_optimize(
            &market(),
            &TimeGrid::uniform(2.0, 2).unwrap(),
            4_000,
            17,
            &CondExp::default(),
            1e-9, // unreachable tolerance
            3,
        )
        .unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 3);
        assert_eq!(report.theta_history.len(), 3);
        assert_eq!(report.max_defect_history.len(), 3);
        assert_eq!(report.max_defect, *report.max_defect_history.last().unwrap());
    }

    #[test]
    fn settings_validate() {
        assert!(OptimizerSettings::new(0.0, 5).validate().is_err());
        assert!(OptimizerSettings::new(0.01, 0).validate().is_err());
        let mut s = OptimizerSettings::new(0.01, 5);
        s.damping = 0.0;
        assert!(s.validate().is_err());
        s.damping = 1.5;
        assert!(s.validate().is_err());
        s.damping = 1.0;
        assert!(s.validate().is_ok());
    }

    #[test]
    fn report_round_trips_with_six_json_keys() {
        let report = MartingaleReport {
            epsilon: 0.005,
            converged: true,
            iterations: 3,
            max_defect: 0.001,
            defect_by_index: vec![0.001, 0.0005],
            theta_history: vec![0.0, 0.2, 0.24],
            max_defect_history: vec![0.05, 0.01, 0.001],
        };
        let json = serde_json::to_string(&report).unwrap();
        for key in
            ["epsilon", "converged", "iterations", "max_defect", "defect_by_index", "theta_history"]
        {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        assert!(!json.contains("max_defect_history"));
        let back: MartingaleReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.theta_history, report.theta_history);
        assert!(back.max_defect_history.is_empty());
    }
}
