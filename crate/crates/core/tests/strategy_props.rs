//! Property tests for the portfolio layer: linearity, additivity, scale
//! equivariance, adaptedness, and exact replay of the built-in policies.
//! Power-of-two scalings are asserted bitwise, since they commute with IEEE
//! rounding; everything else gets a rounding allowance.

use martopt::grid::TimeGrid;
use martopt::strategy::{
    gain_process, make_strategy, portfolio_value, self_financing_defect, BondCurve, Policy,
    TradingStrategy,
};
use martopt::{PathEnsemble, PathKind};
use proptest::prelude::*;

fn price_matrix(n_paths: usize, n_times: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec(0.5f64..200.0, n_times..=n_times),
        n_paths..=n_paths,
    )
}

fn holding_matrix(n_paths: usize, n_times: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, n_times..=n_times), n_paths..=n_paths)
}

fn scale(m: &[Vec<f64>], k: f64) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(|v| k * v).collect()).collect()
}

fn add(m: &[Vec<f64>], n: &[Vec<f64>]) -> Vec<Vec<f64>> {
    m.iter().zip(n).map(|(r, s)| r.iter().zip(s).map(|(a, b)| a + b).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn portfolio_is_linear_and_gains_are_additive(
        (prices, a1, b1, a2, b2, r) in (1usize..5, 2usize..6).prop_flat_map(|(np, nt)| (
            price_matrix(np, nt),
            holding_matrix(np, nt),
            holding_matrix(np, nt),
            holding_matrix(np, nt),
            holding_matrix(np, nt),
            0.0f64..0.1,
        )),
    ) {
        let n_times = prices[0].len();
        let grid = TimeGrid::uniform(1.0, n_times - 1).unwrap();
        let ens = PathEnsemble::from_values(PathKind::Price, 0, grid.clone(), prices).unwrap();
        let bond = BondCurve::new(r, &grid).unwrap();
        let s1 = TradingStrategy::from_matrices_unchecked(a1.clone(), b1.clone(), grid.clone());
        let s2 = TradingStrategy::from_matrices_unchecked(a2.clone(), b2.clone(), grid.clone());

        // doubling commutes with rounding, so it must be exact
        let v1 = portfolio_value(&s1, &ens, &bond)?;
        let doubled = TradingStrategy::from_matrices_unchecked(scale(&a1, 2.0), scale(&b1, 2.0), grid.clone());
        let v2 = portfolio_value(&doubled, &ens, &bond)?;
        for p in 0..ens.n_paths() {
            for i in 0..n_times {
                prop_assert_eq!((2.0 * v1.path(p)[i]).to_bits(), v2.path(p)[i].to_bits());
            }
        }

        // general scaling, up to rounding
        let lam = -1.3;
        let scaled = TradingStrategy::from_matrices_unchecked(scale(&a1, lam), scale(&b1, lam), grid.clone());
        let vs = portfolio_value(&scaled, &ens, &bond)?;
        for p in 0..ens.n_paths() {
            for i in 0..n_times {
                let want = lam * v1.path(p)[i];
                prop_assert!((vs.path(p)[i] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }

        // gains add across strategies, up to rounding
        let g1 = gain_process(&s1, &ens, &bond)?;
        let g2 = gain_process(&s2, &ens, &bond)?;
        let sum = TradingStrategy::from_matrices_unchecked(add(&a1, &a2), add(&b1, &b2), grid.clone());
        let gsum = gain_process(&sum, &ens, &bond)?;
        for p in 0..ens.n_paths() {
            for i in 0..n_times {
                let want = g1.path(p)[i] + g2.path(p)[i];
                prop_assert!(
                    (gsum.path(p)[i] - want).abs() <= 1e-10 * (1.0 + want.abs()),
                    "path {} index {}: {} vs {}", p, i, gsum.path(p)[i], want
                );
            }
        }
    }

    #[test]
    fn defect_scales_with_the_strategy(
        (prices, a, b) in (1usize..5, 2usize..6).prop_flat_map(|(np, nt)| (
            price_matrix(np, nt),
            holding_matrix(np, nt),
            holding_matrix(np, nt),
        )),
    ) {
        let n_times = prices[0].len();
        let grid = TimeGrid::uniform(1.0, n_times - 1).unwrap();
        let ens = PathEnsemble::from_values(PathKind::Price, 0, grid.clone(), prices).unwrap();
        let bond = BondCurve::new(0.05, &grid).unwrap();
        let s = TradingStrategy::from_matrices_unchecked(a.clone(), b.clone(), grid.clone());
        let base = self_financing_defect(&s, &ens, &bond)?;

        let s2 = TradingStrategy::from_matrices_unchecked(scale(&a, 2.0), scale(&b, 2.0), grid.clone());
        let d2 = self_financing_defect(&s2, &ens, &bond)?;
        for (d, want) in d2.iter().zip(&base) {
            prop_assert_eq!(d.to_bits(), (2.0 * want).to_bits());
        }

        let s3 = TradingStrategy::from_matrices_unchecked(scale(&a, 3.0), scale(&b, 3.0), grid);
        let d3 = self_financing_defect(&s3, &ens, &bond)?;
        for (d, want) in d3.iter().zip(&base) {
            prop_assert!((d - 3.0 * want).abs() <= 1e-10 * (1.0 + want));
        }
    }

    #[test]
    fn buy_and_hold_gain_telescopes(
        prices in (1usize..6, 2usize..8).prop_flat_map(|(np, nt)| price_matrix(np, nt)),
    ) {
        let n_times = prices[0].len();
        let grid = TimeGrid::uniform(2.0, n_times - 1).unwrap();
        let ens = PathEnsemble::from_values(PathKind::Price, 0, grid.clone(), prices).unwrap();
        let bond = BondCurve::new(0.04, &grid).unwrap();
        let s = make_strategy(&Policy::BuyAndHold, &ens)?;
        let g = gain_process(&s, &ens, &bond)?;
        for p in 0..ens.n_paths() {
            for i in 0..n_times {
                let want = ens.path(p)[i] - ens.path(p)[0];
                prop_assert!(
                    (g.path(p)[i] - want).abs() <= 1e-11 * (1.0 + want.abs()) * n_times as f64,
                    "path {} index {}", p, i
                );
            }
        }
    }

    #[test]
    fn threshold_policy_replays_its_definition(
        (prices, level) in (1usize..5, 2usize..7).prop_flat_map(|(np, nt)| (
            price_matrix(np, nt),
            20.0f64..180.0,
        )),
    ) {
        let n_times = prices[0].len();
        let grid = TimeGrid::uniform(1.0, n_times - 1).unwrap();
        let ens = PathEnsemble::from_values(PathKind::Price, 0, grid, prices).unwrap();
        let s = make_strategy(&Policy::Threshold { level }, &ens)?;
        for p in 0..ens.n_paths() {
            for i in 0..n_times {
                let want = if ens.path(p)[i] > level { 1.0 } else { 0.0 };
                prop_assert_eq!(s.a()[p][i], want);
                prop_assert_eq!(s.b()[p][i], 0.0);
            }
        }
    }

    #[test]
    fn policies_are_adapted_to_the_visible_prefix(
        (prices, split) in (2usize..5, 4usize..7).prop_flat_map(|(np, nt)| (
            price_matrix(np, nt),
            1usize..3,
        )),
    ) {
        // two ensembles identical through `split`, diverging after: any
        // policy built from prefixes must agree up to and including it
        let n_times = prices[0].len();
        let split = split.min(n_times - 2);
        let mut diverged = prices.clone();
        for row in &mut diverged {
            for v in row.iter_mut().skip(split + 1) {
                *v *= 1.5;
            }
        }
        let grid = TimeGrid::uniform(1.0, n_times - 1).unwrap();
        let e1 = PathEnsemble::from_values(PathKind::Price, 0, grid.clone(), prices).unwrap();
        let e2 = PathEnsemble::from_values(PathKind::Price, 0, grid, diverged).unwrap();
        for policy in [
            Policy::Threshold { level: 90.0 },
            Policy::ConstantMix { w: 0.6, r: 0.03 },
            Policy::BuyAndHold,
        ] {
            let s1 = make_strategy(&policy, &e1)?;
            let s2 = make_strategy(&policy, &e2)?;
            for p in 0..e1.n_paths() {
                for i in 0..=split {
                    prop_assert_eq!(s1.a()[p][i].to_bits(), s2.a()[p][i].to_bits());
                    prop_assert_eq!(s1.b()[p][i].to_bits(), s2.b()[p][i].to_bits());
                }
            }
        }
    }

    #[test]
    fn portfolio_matches_naive_recomputation(
        (prices, a, b) in (1usize..4, 2usize..6).prop_flat_map(|(np, nt)| (
            price_matrix(np, nt),
            holding_matrix(np, nt),
            holding_matrix(np, nt),
        )),
    ) {
        let n_times = prices[0].len();
        let grid = TimeGrid::uniform(1.5, n_times - 1).unwrap();
        let ens = PathEnsemble::from_values(PathKind::Price, 0, grid.clone(), prices).unwrap();
        let bond = BondCurve::new(0.07, &grid).unwrap();
        let s = TradingStrategy::from_matrices_unchecked(a.clone(), b.clone(), grid);
        let v = portfolio_value(&s, &ens, &bond)?;
        for p in 0..ens.n_paths() {
            for i in 0..n_times {
                let naive = a[p][i] * ens.path(p)[i] + b[p][i] * bond.value(i);
                prop_assert_eq!(v.path(p)[i].to_bits(), naive.to_bits());
            }
        }
    }
}

#[test]
fn constant_mix_stays_self_financing_on_simulated_paths() {
    use martopt::market::MarketParams;
    use martopt::{sample_brownian, simulate_gbm_exact};

    let params = MarketParams::new(100.0, 0.08, 0.05, 0.03).unwrap();
    let grid = TimeGrid::uniform(1.0, 16).unwrap();
    let b = sample_brownian(&grid, 64, 12).unwrap();
    let x = simulate_gbm_exact(&params, &b).unwrap();
    let bond = BondCurve::new(params.r, &grid).unwrap();
    let s = make_strategy(&Policy::ConstantMix { w: 0.5, r: params.r }, &x).unwrap();
    let defects = self_financing_defect(&s, &x, &bond).unwrap();
    for (p, d) in defects.iter().enumerate() {
        assert!(*d <= 1e-9 * params.x0, "path {p}: defect {d}");
    }
    // and the two legs carry equal value at every rebalance
    for p in 0..x.n_paths() {
        for i in 0..x.n_times() {
            let stock_leg = s.a()[p][i] * x.path(p)[i];
            let bond_leg = s.b()[p][i] * bond.value(i);
            assert!((stock_leg - bond_leg).abs() < 1e-9 * (stock_leg.abs() + 1.0));
        }
    }
}
