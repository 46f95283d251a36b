//! Error type shared across the crate.

use crate::ensemble::PathKind;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the library.
///
/// Numerical failures carry enough context to locate the offending path and
/// step; they are never silently repaired (no clamping, no absorption).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Time grid violates its invariants (unsorted, non-finite, empty, or not starting at 0).
    #[error("invalid time grid: {0}")]
    Grid(String),

    /// Market, contract, or estimator parameters violate their invariants.
    #[error("invalid parameters: {0}")]
    Params(String),

    /// Argument outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An ensemble of the wrong kind was supplied.
    #[error("expected a {expected} ensemble, got {got}")]
    Kind { expected: PathKind, got: PathKind },

    /// Matrix shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimensions(String),

    /// The explicit Euler step drove a price to zero or below. The scheme is
    /// only conditionally positive; refine the grid instead of clamping.
    #[error("euler scheme produced a non-positive price on path {path} at step {step} (dt = {dt}); refine the time grid")]
    EulerPositivity { path: usize, step: usize, dt: f64 },

    /// A policy callback returned NaN or an infinity.
    #[error("policy produced a non-finite holding on path {path} at time index {time_index}")]
    NonFinitePolicy { path: usize, time_index: usize },

    /// Zero diffusion with a drift away from the target rate: the drift-shift
    /// family is degenerate and the optimizer has nothing to adjust.
    #[error("no drift shift can restore the martingale property: alpha = 0 with drift {mu} != target rate {rho}")]
    DegenerateDiffusion { mu: f64, rho: f64 },

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),

    /// A serialized envelope did not parse back into a valid object.
    #[error("format error: {0}")]
    Format(String),
}
