//! Monte Carlo toolkit for geometric Brownian market models: path
//! simulation, European call pricing, self-financing trading strategies, and
//! an adaptive drift calibration that drives the discounted price toward a
//! martingale.
//!
//! Everything is deterministic given a seed. Path-level randomness comes
//! from per-path counter-based substreams, so enlarging an ensemble keeps
//! the paths already drawn, and all cross-path reductions use a fixed-shape
//! pairwise tree, so results are identical whatever the thread count. The
//! crate is freestanding numerics (special functions included) and compiles
//! unchanged to wasm, where the parallel layer degrades to sequential loops.
//!
//! The modules mirror the pipeline:
//!
//! * [`grid`], [`market`], [`rng`], [`stats`]: shared scaffolding.
//! * [`density`]: closed-form transition densities for sanity checks.
//! * [`gbm`]: Brownian and price ensembles, exact and Euler schemes.
//! * [`pricing`]: Black-Scholes and Monte Carlo call quotes.
//! * [`strategy`]: holdings, portfolio values, gains, self-financing checks.
//! * [`martingale`]: conditional-expectation estimators, defect reports, and
//!   the repeat-until-epsilon drift-shift optimizer.
//! * [`io`]: CSV and JSON round trips for all of the above.

// coefficient tables and frozen reference values keep their source digits
#![allow(clippy::excessive_precision)]
// validation deliberately writes `!(x > 0.0)` so NaN fails closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod ensemble;
pub mod error;
pub mod gbm;
pub mod grid;
pub mod io;
pub mod market;
pub mod martingale;
mod par;
pub mod pricing;
pub mod rng;
pub mod stats;
pub mod strategy;

pub use ensemble::{PathEnsemble, PathKind};
pub use error::{Error, Result};
pub use gbm::{sample_brownian, simulate_gbm_euler, simulate_gbm_exact};
pub use grid::TimeGrid;
pub use market::MarketParams;
pub use martingale::{
    adaptive_optimize, adaptive_optimize_undiscounted, adaptive_optimize_with,
    conditional_expectation, martingale_defect, CondExp, MartingaleReport, OptimizerSettings,
};
pub use pricing::{bs_call_price, mc_call_price, CallContract, PriceQuote};
pub use strategy::{
    gain_process, make_strategy, make_strategy_capped, portfolio_value, self_financing_defect,
    BondCurve, Policy, TradingStrategy,
};
