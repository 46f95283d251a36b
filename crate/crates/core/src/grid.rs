//! Simulation time grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered simulation times `0 = t_0 < t_1 < ... < t_N = T` (in years).
///
/// Grids are validated on construction and immutable afterwards, so every
/// consumer can rely on strictly positive steps. Steps need not be uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// Builds a grid from explicit times. Requires `times[0] = 0`, strict
    /// monotonicity, finiteness, and at least one point.
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Grid("no time points".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::Grid(format!("first time must be 0, got {}", times[0])));
        }
        for (i, w) in times.windows(2).enumerate() {
            if !w[1].is_finite() {
                return Err(Error::Grid(format!("non-finite time at index {}", i + 1)));
            }
            if w[1] <= w[0] {
                return Err(Error::Grid(format!(
                    "times must be strictly increasing, but t[{}] = {} >= t[{}] = {}",
                    i,
                    w[0],
                    i + 1,
                    w[1]
                )));
            }
        }
        Ok(Self { times })
    }

    /// Uniform grid with `n_steps` equal steps covering `[0, horizon]`.
    pub fn uniform(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Grid(format!("horizon must be positive and finite, got {horizon}")));
        }
        if n_steps == 0 {
            return Err(Error::Grid("n_steps must be at least 1".into()));
        }
        let times = (0..=n_steps).map(|i| horizon * i as f64 / n_steps as f64).collect();
        Self::new(times)
    }

    /// All grid times, including 0 and the horizon.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of steps `N`.
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Number of grid points `N + 1`.
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    /// Step width `t_{i+1} - t_i`.
    pub fn step(&self, i: usize) -> f64 {
        self.times[i + 1] - self.times[i]
    }

    /// Final time `T`.
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;
    fn try_from(times: Vec<f64>) -> Result<Self> {
        Self::new(times)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(grid: TimeGrid) -> Self {
        grid.times
    }
}
