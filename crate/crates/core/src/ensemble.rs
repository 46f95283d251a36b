//! Path ensembles: the per-path, per-time value matrices every module
//! exchanges.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// What the values of an ensemble represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    /// Brownian motion; every path starts at 0.
    Brownian,
    /// Asset prices; strictly positive.
    Price,
    /// Portfolio values.
    Portfolio,
    /// Accumulated trading gains; every path starts at 0.
    Gain,
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PathKind::Brownian => "brownian",
            PathKind::Price => "price",
            PathKind::Portfolio => "portfolio",
            PathKind::Gain => "gain",
        };
        f.write_str(s)
    }
}

/// Matrix of process values, `n_paths` rows by `N + 1` columns, tagged with
/// the grid and the master seed that produced it.
///
/// Ensembles are immutable once constructed and safe to share across threads.
/// The same `(seed, grid, n_paths, params)` always regenerates bit-identical
/// values; see [`crate::rng`] for the substream contract behind that.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    kind: PathKind,
    seed: u64,
    grid: TimeGrid,
    values: Vec<Vec<f64>>,
}

impl PathEnsemble {
    /// Wraps a value matrix after validating it against the grid and the
    /// kind's invariants (finiteness everywhere; first column 0 for brownian
    /// and gain kinds; strict positivity for prices).
    pub fn from_values(
        kind: PathKind,
        seed: u64,
        grid: TimeGrid,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimensions("ensemble needs at least one path".into()));
        }
        let width = grid.n_times();
        for (p, row) in values.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Dimensions(format!(
                    "path {p} has {} values but the grid has {width} times",
                    row.len()
                )));
            }
            for (i, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Dimensions(format!(
                        "non-finite value on path {p} at time index {i}"
                    )));
                }
                if kind == PathKind::Price && *v <= 0.0 {
                    return Err(Error::Dimensions(format!(
                        "price ensemble has non-positive value {v} on path {p} at time index {i}"
                    )));
                }
            }
            if matches!(kind, PathKind::Brownian | PathKind::Gain) && row[0] != 0.0 {
                return Err(Error::Dimensions(format!(
                    "{kind} paths must start at 0, path {p} starts at {}",
                    row[0]
                )));
            }
        }
        Ok(Self { kind, seed, grid, values })
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.values.len()
    }

    pub fn n_times(&self) -> usize {
        self.grid.n_times()
    }

    /// All paths, row major.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// One path's values across the grid.
    pub fn path(&self, p: usize) -> &[f64] {
        &self.values[p]
    }

    /// Copies the cross-section at a time index.
    pub fn column(&self, time_index: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[time_index]).collect()
    }

    /// Ensures the ensemble is of the expected kind.
    pub fn expect_kind(&self, expected: PathKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::Kind { expected, got: self.kind });
        }
        Ok(())
    }
}
