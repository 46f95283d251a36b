//! Brownian path sampling and geometric Brownian motion, exact and Euler.

use crate::ensemble::{PathEnsemble, PathKind};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::market::MarketParams;
use crate::par;
use crate::rng::path_stream;

/// Samples standard Brownian motion on the grid: independent normal
/// increments with variance equal to the step width.
///
/// Path `p` draws from the substream `(seed, p)`, so the ensemble is
/// reproducible and independent of how the paths are scheduled across
/// threads.
pub fn sample_brownian(grid: &TimeGrid, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(Error::Domain("sample_brownian needs n_paths >= 1".into()));
    }
    let times = grid.times();
    let sqrt_steps: Vec<f64> = (0..grid.n_steps()).map(|i| grid.step(i).sqrt()).collect();
    let values = par::map_indexed(n_paths, |p| {
        let mut stream = path_stream(seed, p as u64);
        let mut row = Vec::with_capacity(times.len());
        row.push(0.0);
        let mut b = 0.0;
        for s in &sqrt_steps {
            b += s * stream.next_normal();
            row.push(b);
        }
        row
    });
    PathEnsemble::from_values(PathKind::Brownian, seed, grid.clone(), values)
}

/// Maps a Brownian ensemble through the strong solution
/// `X_t = x0 exp((mu - alpha/2) t + sqrt(alpha) B_t)`.
///
/// The exponent rate is the velocity `c = mu - alpha/2` from the Ito
/// correction, which keeps this solution consistent with the SDE
/// `dX = mu X dt + sqrt(alpha) X dB` simulated by [`simulate_gbm_euler`].
/// Prices are strictly positive by construction.
pub fn simulate_gbm_exact(params: &MarketParams, brownian: &PathEnsemble) -> Result<PathEnsemble> {
    params.validate()?;
    brownian.expect_kind(PathKind::Brownian)?;
    let grid = brownian.grid().clone();
    let times = grid.times().to_vec();
    let c = params.velocity();
    let sa = params.alpha.sqrt();
    let x0 = params.x0;
    let values = par::map_indexed(brownian.n_paths(), |p| {
        let path = brownian.path(p);
        times.iter().zip(path).map(|(t, b)| x0 * (c * t + sa * b).exp()).collect()
    });
    PathEnsemble::from_values(PathKind::Price, brownian.seed(), grid, values)
}

/// Explicit Euler discretization of `dX = mu X dt + sqrt(alpha) X dB`:
/// `X_{i+1} = X_i (1 + mu dt_i + sqrt(alpha) dB_i)`, strong order 1/2.
///
/// The scheme is only conditionally positive. When a step drives a price to
/// zero or below the whole simulation fails with the offending path, step and
/// step width; clamping would silently bias everything priced downstream, so
/// none is done. Refine the grid instead.
pub fn simulate_gbm_euler(params: &MarketParams, brownian: &PathEnsemble) -> Result<PathEnsemble> {
    params.validate()?;
    brownian.expect_kind(PathKind::Brownian)?;
    let grid = brownian.grid().clone();
    let steps: Vec<f64> = (0..grid.n_steps()).map(|i| grid.step(i)).collect();
    let sa = params.alpha.sqrt();
    let mu = params.mu;
    let x0 = params.x0;
    let rows: Vec<std::result::Result<Vec<f64>, Error>> =
        par::map_indexed(brownian.n_paths(), |p| {
            let path = brownian.path(p);
            let mut row = Vec::with_capacity(path.len());
            let mut x = x0;
            row.push(x);
            for (i, dt) in steps.iter().enumerate() {
                let db = path[i + 1] - path[i];
                x *= 1.0 + mu * dt + sa * db;
                if !(x > 0.0) {
                    return Err(Error::EulerPositivity { path: p, step: i, dt: *dt });
                }
                row.push(x);
            }
            Ok(row)
        });
    let values = rows.into_iter().collect::<std::result::Result<Vec<_>, _>>()?;
    PathEnsemble::from_values(PathKind::Price, brownian.seed(), grid, values)
}
