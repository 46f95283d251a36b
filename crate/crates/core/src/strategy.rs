//! Trading strategies, the bond, portfolio values, gain processes, and the
//! self-financing defect.
//!
//! A strategy is the pair of adapted holding processes `(a_t, b_t)`: stock
//! units and bond units per path and time. Adaptedness is enforced by
//! construction: [`make_strategy`] hands the policy only the path prefix up
//! to the decision time, never the future. Strategies are not required to be
//! self-financing; [`self_financing_defect`] measures how far a strategy is
//! from financing itself instead of rejecting it.
//!
//! The gain process realizes the stochastic integral of holdings against
//! price and bond increments as a left-point (Ito) sum: the integrand is
//! frozen at the start of each step, which is exactly what adaptedness
//! permits. The notation for that integral admits more than one reading (the
//! per-pair differential is not standard); the gain-integral reading
//! `G = int a dX + int b dbeta` is implemented here, and [`portfolio_value`]
//! is always available alongside it so either object can be inspected.

use crate::ensemble::{PathEnsemble, PathKind};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::par;

/// Bond price `beta(t) = exp(r t)`, the solution of `dbeta = r beta dt` with
/// `beta(0) = 1`.
pub fn bond_price(r: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("bond_price needs t >= 0, got {t}")));
    }
    if !r.is_finite() {
        return Err(Error::Domain(format!("bond_price needs a finite rate, got {r}")));
    }
    Ok((r * t).exp())
}

/// The bond price evaluated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BondCurve {
    r: f64,
    values: Vec<f64>,
}

impl BondCurve {
    pub fn new(r: f64, grid: &TimeGrid) -> Result<Self> {
        let values =
            grid.times().iter().map(|t| bond_price(r, *t)).collect::<Result<Vec<f64>>>()?;
        Ok(Self { r, values })
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    /// `beta` at every grid time; `values()[0] = 1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, time_index: usize) -> f64 {
        self.values[time_index]
    }
}

/// A history-reading holding rule.
///
/// `holdings` receives the path prefix up to and including the decision time
/// (equal-length slices of times and prices) and returns the stock and bond
/// holdings to carry from that time on. Implementations must not assume they
/// see the future; they never do.
pub trait PolicyRule: Sync {
    fn holdings(&self, times: &[f64], prices: &[f64]) -> (f64, f64);
}

impl<F> PolicyRule for F
where
    F: Fn(&[f64], &[f64]) -> (f64, f64) + Sync,
{
    fn holdings(&self, times: &[f64], prices: &[f64]) -> (f64, f64) {
        self(times, prices)
    }
}

/// Built-in named policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Hold one unit of stock, no bond.
    BuyAndHold,
    /// Hold one unit of bond, no stock.
    BondOnly,
    /// One unit of stock while the price exceeds `level`, otherwise nothing.
    Threshold { level: f64 },
    /// Classic rebalancing rule: keep a fraction `w` of wealth in stock and
    /// `1 - w` in the bond, where wealth is the self-financed portfolio grown
    /// from the initial price. Needs the bond rate `r` to value the bond leg.
    ConstantMix { w: f64, r: f64 },
}

impl PolicyRule for Policy {
    fn holdings(&self, times: &[f64], prices: &[f64]) -> (f64, f64) {
        match self {
            Policy::BuyAndHold => (1.0, 0.0),
            Policy::BondOnly => (0.0, 1.0),
            Policy::Threshold { level } => {
                let here = *prices.last().unwrap();
                (if here > *level { 1.0 } else { 0.0 }, 0.0)
            }
            Policy::ConstantMix { w, r } => constant_mix(*w, *r, times, prices),
        }
    }
}

/// Replays the self-financed wealth recursion over the prefix and splits the
/// current wealth `w : (1 - w)` between stock and bond. O(prefix) per call,
/// which keeps the policy a pure function of the visible history. Wealth
/// starts at the initial price.
fn constant_mix(w: f64, r: f64, times: &[f64], prices: &[f64]) -> (f64, f64) {
    let mut a = w;
    let mut b = (1.0 - w) * prices[0];
    for j in 1..times.len() {
        let beta = (r * times[j]).exp();
        let wealth = a * prices[j] + b * beta;
        a = w * wealth / prices[j];
        b = (1.0 - w) * wealth / beta;
    }
    (a, b)
}

/// Adapted holdings `(a, b)` per path per time.
///
/// Built via [`make_strategy`], which guarantees adaptedness, or assembled
/// directly with [`TradingStrategy::from_matrices_unchecked`] when the caller
/// takes that guarantee on themselves. All entries are finite; magnitudes are
/// additionally screened against a cap as an empirical square-integrability
/// surrogate (see [`make_strategy_capped`]).
#[derive(Debug, Clone, PartialEq)]
pub struct TradingStrategy {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    grid: TimeGrid,
}

impl TradingStrategy {
    /// Wraps raw holding matrices without checking adaptedness; shapes are
    /// still validated by every operation that consumes the strategy. Meant
    /// for tests and for replaying externally computed strategies.
    pub fn from_matrices_unchecked(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, grid: TimeGrid) -> Self {
        Self { a, b, grid }
    }

    /// Stock holdings, `n_paths` rows by `N + 1` columns.
    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    /// Bond holdings, same shape as `a`.
    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.a.len()
    }

    fn check_against(&self, prices: &PathEnsemble) -> Result<()> {
        if self.a.len() != self.b.len() {
            return Err(Error::Dimensions(format!(
                "strategy has {} stock rows but {} bond rows",
                self.a.len(),
                self.b.len()
            )));
        }
        if self.a.len() != prices.n_paths() {
            return Err(Error::Dimensions(format!(
                "strategy has {} paths but the ensemble has {}",
                self.a.len(),
                prices.n_paths()
            )));
        }
        let width = prices.n_times();
        for (p, (ra, rb)) in self.a.iter().zip(&self.b).enumerate() {
            if ra.len() != width || rb.len() != width {
                return Err(Error::Dimensions(format!(
                    "strategy row {p} has widths ({}, {}), ensemble has {width} times",
                    ra.len(),
                    rb.len()
                )));
            }
        }
        Ok(())
    }
}

/// Default magnitude cap for holdings, the square-integrability screen.
pub const DEFAULT_HOLDING_CAP: f64 = 1e9;

/// Builds a strategy by running `policy` along every price path prefix.
/// Holdings above [`DEFAULT_HOLDING_CAP`] in magnitude are reported through
/// the `log` warning channel but kept.
pub fn make_strategy<P>(policy: &P, prices: &PathEnsemble) -> Result<TradingStrategy>
where
    P: PolicyRule + ?Sized,
{
    make_strategy_capped(policy, prices, DEFAULT_HOLDING_CAP)
}

/// [`make_strategy`] with an explicit magnitude cap.
///
/// Non-finite holdings are rejected outright with the offending path and
/// time; finite values merely beyond the cap are legal but warn, since a
/// finite sample cannot genuinely certify square integrability and a cap
/// violation is usually a runaway policy.
pub fn make_strategy_capped<P>(
    policy: &P,
    prices: &PathEnsemble,
    cap: f64,
) -> Result<TradingStrategy>
where
    P: PolicyRule + ?Sized,
{
    prices.expect_kind(PathKind::Price)?;
    if !(cap > 0.0) {
        return Err(Error::Params(format!("holding cap must be positive, got {cap}")));
    }
    // one path's stock and bond holdings plus its count of cap overruns
    type PolicyRow = (Vec<f64>, Vec<f64>, usize);
    let times = prices.grid().times();
    let rows: Vec<Result<PolicyRow>> = par::map_indexed(prices.n_paths(), |p| {
        let path = prices.path(p);
        let mut ra = Vec::with_capacity(times.len());
        let mut rb = Vec::with_capacity(times.len());
        let mut over = 0usize;
        for i in 0..times.len() {
            let (a, b) = policy.holdings(&times[..=i], &path[..=i]);
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinitePolicy { path: p, time_index: i });
            }
            if a.abs() > cap || b.abs() > cap {
                over += 1;
            }
            ra.push(a);
            rb.push(b);
        }
        Ok((ra, rb, over))
    });
    let mut a = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    let mut over_total = 0usize;
    let mut first_over: Option<usize> = None;
    for (p, row) in rows.into_iter().enumerate() {
        let (ra, rb, over) = row?;
        if over > 0 && first_over.is_none() {
            first_over = Some(p);
        }
        over_total += over;
        a.push(ra);
        b.push(rb);
    }
    if over_total > 0 {
        log::warn!(
            "{over_total} holding(s) exceed the magnitude cap {cap:e} (first on path {}); treating the strategy as square integrable anyway",
            first_over.unwrap()
        );
    }
    Ok(TradingStrategy { a, b, grid: prices.grid().clone() })
}

/// Portfolio value `V = a X + b beta`, evaluated elementwise, exactly in that
/// form.
pub fn portfolio_value(
    strategy: &TradingStrategy,
    prices: &PathEnsemble,
    bond: &BondCurve,
) -> Result<PathEnsemble> {
    prices.expect_kind(PathKind::Price)?;
    strategy.check_against(prices)?;
    check_bond(bond, prices)?;
    let betas = bond.values();
    let values = par::map_indexed(prices.n_paths(), |p| {
        let (ra, rb, x) = (&strategy.a[p], &strategy.b[p], prices.path(p));
        (0..x.len()).map(|i| ra[i] * x[i] + rb[i] * betas[i]).collect()
    });
    PathEnsemble::from_values(PathKind::Portfolio, prices.seed(), prices.grid().clone(), values)
}

/// Accumulated trading gains
/// `G_i = sum_{j<i} a_j (X_{j+1} - X_j) + b_j (beta_{j+1} - beta_j)`.
///
/// Left-point evaluation: the holdings entering step `j` are the ones chosen
/// at its start, as adaptedness requires. `G_0 = 0` on every path.
pub fn gain_process(
    strategy: &TradingStrategy,
    prices: &PathEnsemble,
    bond: &BondCurve,
) -> Result<PathEnsemble> {
    prices.expect_kind(PathKind::Price)?;
    strategy.check_against(prices)?;
    check_bond(bond, prices)?;
    let betas = bond.values();
    let values = par::map_indexed(prices.n_paths(), |p| {
        let (ra, rb, x) = (&strategy.a[p], &strategy.b[p], prices.path(p));
        let mut row = Vec::with_capacity(x.len());
        let mut g = 0.0;
        row.push(g);
        for j in 0..x.len() - 1 {
            g += ra[j] * (x[j + 1] - x[j]) + rb[j] * (betas[j + 1] - betas[j]);
            row.push(g);
        }
        row
    });
    PathEnsemble::from_values(PathKind::Gain, prices.seed(), prices.grid().clone(), values)
}

/// Per-path worst self-financing gap `max_i |V_i - V_0 - G_i|`.
///
/// Zero exactly when the discrete self-financing identity holds along the
/// path. Strategies are allowed to violate it; this measures by how much.
pub fn self_financing_defect(
    strategy: &TradingStrategy,
    prices: &PathEnsemble,
    bond: &BondCurve,
) -> Result<Vec<f64>> {
    let v = portfolio_value(strategy, prices, bond)?;
    let g = gain_process(strategy, prices, bond)?;
    Ok(par::map_indexed(prices.n_paths(), |p| {
        let (vp, gp) = (v.path(p), g.path(p));
        let v0 = vp[0];
        vp.iter().zip(gp).fold(0.0f64, |acc, (vi, gi)| acc.max((vi - v0 - gi).abs()))
    }))
}

fn check_bond(bond: &BondCurve, prices: &PathEnsemble) -> Result<()> {
    if bond.values().len() != prices.n_times() {
        return Err(Error::Dimensions(format!(
            "bond curve has {} points, ensemble has {} times",
            bond.values().len(),
            prices.n_times()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn price_ensemble(rows: Vec<Vec<f64>>, horizon: f64) -> PathEnsemble {
        let grid = TimeGrid::uniform(horizon, rows[0].len() - 1).unwrap();
        PathEnsemble::from_values(PathKind::Price, 0, grid, rows).unwrap()
    }

    #[test]
    fn bond_price_basics() {
        assert_eq!(bond_price(0.3, 0.0).unwrap(), 1.0);
        assert_eq!(bond_price(0.0, 7.5).unwrap(), 1.0);
        assert!(bond_price(0.05, -0.1).is_err());
        let grid = TimeGrid::uniform(2.0, 4).unwrap();
        let curve = BondCurve::new(0.05, &grid).unwrap();
        assert_eq!(curve.value(0), 1.0);
        assert!((curve.value(4) - (0.1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn buy_and_hold_reproduces_prices() {
        let prices = price_ensemble(vec![vec![100.0, 110.0, 95.0], vec![100.0, 90.0, 120.0]], 1.0);
        let bond = BondCurve::new(0.05, prices.grid()).unwrap();
        let s = make_strategy(&Policy::BuyAndHold, &prices).unwrap();
        let v = portfolio_value(&s, &prices, &bond).unwrap();
        assert_eq!(v.values(), prices.values());
    }

    #[test]
    fn bond_only_reproduces_the_bond() {
        let prices = price_ensemble(vec![vec![100.0, 110.0, 95.0]], 1.0);
        let bond = BondCurve::new(0.07, prices.grid()).unwrap();
        let s = make_strategy(&Policy::BondOnly, &prices).unwrap();
        let v = portfolio_value(&s, &prices, &bond).unwrap();
        assert_eq!(v.path(0), bond.values());
    }

    #[test]
    fn time_only_policies_are_constant_across_paths() {
        let prices = price_ensemble(
            vec![vec![100.0, 110.0, 95.0], vec![100.0, 90.0, 120.0], vec![100.0, 101.0, 99.0]],
            1.0,
        );
        let clock = |times: &[f64], _prices: &[f64]| (times.len() as f64, 0.5);
        let s = make_strategy(&clock, &prices).unwrap();
        for i in 0..prices.n_times() {
            for p in 1..prices.n_paths() {
                assert_eq!(s.a()[p][i], s.a()[0][i]);
                assert_eq!(s.b()[p][i], s.b()[0][i]);
            }
        }
    }

    #[test]
    fn zero_strategy_gains_nothing() {
        let prices = price_ensemble(vec![vec![100.0, 110.0, 95.0, 130.0]], 1.0);
        let bond = BondCurve::new(0.05, prices.grid()).unwrap();
        let zero = |_: &[f64], _: &[f64]| (0.0, 0.0);
        let s = make_strategy(&zero, &prices).unwrap();
        let g = gain_process(&s, &prices, &bond).unwrap();
        assert!(g.path(0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_strategy_gain_telescopes() {
        let prices = price_ensemble(vec![vec![100.0, 104.0, 97.0, 108.0, 111.0]], 2.0);
        let bond = BondCurve::new(0.03, prices.grid()).unwrap();
        let s = make_strategy(&|_: &[f64], _: &[f64]| (2.0, -1.5), &prices).unwrap();
        let g = gain_process(&s, &prices, &bond).unwrap();
        let n = prices.n_times() - 1;
        let expected = 2.0 * (111.0 - 100.0) - 1.5 * (bond.value(n) - 1.0);
        assert!((g.path(0)[n] - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn unfinanced_jump_defect_equals_price_at_the_jump() {
        // three steps, r = 0 so the bond is inert; a jumps 1 -> 2 at index 2
        let prices = price_ensemble(vec![vec![100.0, 110.0, 95.0, 105.0]], 1.0);
        let bond = BondCurve::new(0.0, prices.grid()).unwrap();
        let a = vec![vec![1.0, 1.0, 2.0, 2.0]];
        let b = vec![vec![5.0; 4]];
        let s = TradingStrategy::from_matrices_unchecked(a, b, prices.grid().clone());
        let d = self_financing_defect(&s, &prices, &bond).unwrap();
        assert!((d[0] - 95.0).abs() < 1e-12);
    }

    #[test]
    fn financed_jump_has_zero_defect() {
        // same jump, but the stock purchase is paid for by selling bond:
        // b drops by X(t_k) / beta(t_k) at the jump index
        for r in [0.0, 0.1] {
            let prices = price_ensemble(vec![vec![100.0, 110.0, 95.0, 105.0]], 1.0);
            let bond = BondCurve::new(r, prices.grid()).unwrap();
            let financed = 5.0 - 95.0 / bond.value(2);
            let a = vec![vec![1.0, 1.0, 2.0, 2.0]];
            let b = vec![vec![5.0, 5.0, financed, financed]];
            let s = TradingStrategy::from_matrices_unchecked(a, b, prices.grid().clone());
            let d = self_financing_defect(&s, &prices, &bond).unwrap();
            assert!(d[0] <= 1e-12 * 105.0, "defect {} at r = {r}", d[0]);
        }
    }

    #[test]
    fn non_finite_policies_are_rejected_with_location() {
        let prices = price_ensemble(vec![vec![100.0, 110.0, 95.0]], 1.0);
        let bad = |_: &[f64], prices: &[f64]| {
            if prices.len() == 2 {
                (f64::NAN, 0.0)
            } else {
                (1.0, 0.0)
            }
        };
        match make_strategy(&bad, &prices).unwrap_err() {
            Error::NonFinitePolicy { path, time_index } => {
                assert_eq!(path, 0);
                assert_eq!(time_index, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatches_are_usage_errors() {
        let prices = price_ensemble(vec![vec![100.0, 110.0, 95.0]], 1.0);
        let bond = BondCurve::new(0.0, prices.grid()).unwrap();
        let s = TradingStrategy::from_matrices_unchecked(
            vec![vec![1.0, 1.0]],
            vec![vec![0.0, 0.0]],
            prices.grid().clone(),
        );
        assert!(matches!(portfolio_value(&s, &prices, &bond), Err(Error::Dimensions(_))));
    }

    #[test]
    fn constant_mix_weights_track_wealth() {
        let prices = price_ensemble(vec![vec![100.0, 120.0, 80.0, 100.0]], 1.0);
        let bond = BondCurve::new(0.0, prices.grid()).unwrap();
        let s = make_strategy(&Policy::ConstantMix { w: 0.5, r: 0.0 }, &prices).unwrap();
        // at every index the stock leg must equal the bond leg in value
        for i in 0..prices.n_times() {
            let stock_leg = s.a()[0][i] * prices.path(0)[i];
            let bond_leg = s.b()[0][i] * bond.value(i);
            assert!((stock_leg - bond_leg).abs() < 1e-9, "index {i}");
        }
    }
}
