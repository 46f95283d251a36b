//! Serialization of ensembles, strategies, quotes, and reports.
//!
//! Two formats: a long-form CSV for spreadsheet work and a JSON envelope for
//! lossless round trips. CSV floats carry 17 significant digits so parsing
//! them back reproduces the exact bits; JSON relies on serde_json's
//! shortest-round-trip printing for the same guarantee. CSV ensembles omit
//! the kind and seed metadata, so JSON is the canonical interchange format.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::ensemble::{PathEnsemble, PathKind};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::martingale::MartingaleReport;
use crate::pricing::PriceQuote;
use crate::strategy::TradingStrategy;

/// Formats a float with enough digits to round-trip exactly.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Lossless JSON form of a path ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleEnvelope {
    pub kind: PathKind,
    pub seed: u64,
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub values: Vec<Vec<f64>>,
}

impl From<&PathEnsemble> for EnsembleEnvelope {
    fn from(ens: &PathEnsemble) -> Self {
        EnsembleEnvelope {
            kind: ens.kind(),
            seed: ens.seed(),
            grid: ens.grid().clone(),
            n_paths: ens.n_paths(),
            values: ens.values().to_vec(),
        }
    }
}

impl TryFrom<EnsembleEnvelope> for PathEnsemble {
    type Error = Error;

    fn try_from(env: EnsembleEnvelope) -> Result<PathEnsemble> {
        if env.n_paths != env.values.len() {
            return Err(Error::Format(format!(
                "envelope declares {} paths but carries {}",
                env.n_paths,
                env.values.len()
            )));
        }
        PathEnsemble::from_values(env.kind, env.seed, env.grid, env.values)
    }
}

/// Writes an ensemble as `path,time_index,time,value` rows.
pub fn write_ensemble_csv<W: Write>(w: &mut W, ens: &PathEnsemble) -> Result<()> {
    let times = ens.grid().times();
    writeln!(w, "path,time_index,time,value")?;
    for (p, row) in ens.values().iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            writeln!(w, "{p},{i},{},{}", full(times[i]), full(*v))?;
        }
    }
    Ok(())
}

/// Writes the JSON envelope, pretty-printed with a trailing newline.
pub fn write_ensemble_json<W: Write>(w: &mut W, ens: &PathEnsemble) -> Result<()> {
    let env = EnsembleEnvelope::from(ens);
    serde_json::to_writer_pretty(&mut *w, &env)?;
    writeln!(w)?;
    Ok(())
}

/// Reads an ensemble back from its JSON envelope, re-validating shape and
/// kind constraints.
pub fn read_ensemble_json<R: Read>(r: R) -> Result<PathEnsemble> {
    let env: EnsembleEnvelope = serde_json::from_reader(r)?;
    PathEnsemble::try_from(env)
}

/// Lossless JSON form of a trading strategy: the ensemble envelope with
/// `kind = "strategy"` and the paired holding matrices in place of `values`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyEnvelope {
    pub kind: String,
    pub seed: u64,
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

/// Writes a strategy as its JSON envelope. `seed` records the ensemble the
/// holdings were built from; the strategy itself carries no seed.
pub fn write_strategy_json<W: Write>(w: &mut W, strat: &TradingStrategy, seed: u64) -> Result<()> {
    let env = StrategyEnvelope {
        kind: "strategy".into(),
        seed,
        grid: strat.grid().clone(),
        n_paths: strat.n_paths(),
        a: strat.a().to_vec(),
        b: strat.b().to_vec(),
    };
    serde_json::to_writer_pretty(&mut *w, &env)?;
    writeln!(w)?;
    Ok(())
}

/// Reads a strategy back from its JSON envelope.
pub fn read_strategy_json<R: Read>(r: R) -> Result<TradingStrategy> {
    let env: StrategyEnvelope = serde_json::from_reader(r)?;
    if env.kind != "strategy" {
        return Err(Error::Format(format!(
            "expected a strategy envelope, got kind {:?}",
            env.kind
        )));
    }
    let n_times = env.grid.n_times();
    if env.a.len() != env.n_paths
        || env.b.len() != env.n_paths
        || env.a.iter().chain(&env.b).any(|row| row.len() != n_times)
    {
        return Err(Error::Format(
            "strategy envelope shape does not match its declared grid and path count".into(),
        ));
    }
    Ok(TradingStrategy::from_matrices_unchecked(env.a, env.b, env.grid))
}

/// Writes holdings as `path,time_index,time,stock_holding,bond_holding`.
pub fn write_strategy_csv<W: Write>(w: &mut W, strat: &TradingStrategy) -> Result<()> {
    let times = strat.grid().times();
    writeln!(w, "path,time_index,time,stock_holding,bond_holding")?;
    for p in 0..strat.n_paths() {
        let (ra, rb) = (&strat.a()[p], &strat.b()[p]);
        for i in 0..times.len() {
            writeln!(w, "{p},{i},{},{},{}", full(times[i]), full(ra[i]), full(rb[i]))?;
        }
    }
    Ok(())
}

/// Writes a price quote as a JSON object.
pub fn write_quote_json<W: Write>(w: &mut W, quote: &PriceQuote) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, quote)?;
    writeln!(w)?;
    Ok(())
}

/// Writes a price quote as a one-row CSV.
pub fn write_quote_csv<W: Write>(w: &mut W, quote: &PriceQuote) -> Result<()> {
    writeln!(w, "price,std_error,n_paths,method")?;
    writeln!(
        w,
        "{},{},{},{}",
        full(quote.price),
        full(quote.std_error),
        quote.n_paths,
        quote.method
    )?;
    Ok(())
}

/// Writes a defect or optimizer report as a JSON object.
pub fn write_report_json<W: Write>(w: &mut W, report: &MartingaleReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, report)?;
    writeln!(w)?;
    Ok(())
}

/// Reads a report back from JSON.
pub fn read_report_json<R: Read>(r: R) -> Result<MartingaleReport> {
    Ok(serde_json::from_reader(r)?)
}

/// Writes the optimizer trace as `iteration,theta,max_defect` rows.
///
/// Only meaningful for reports produced by an optimizer run, where the two
/// histories have equal length; plain defect reports have empty histories
/// and produce a header-only file.
pub fn write_report_iterations_csv<W: Write>(w: &mut W, report: &MartingaleReport) -> Result<()> {
    if report.theta_history.len() != report.max_defect_history.len() {
        return Err(Error::Format(format!(
            "iteration trace is incomplete: {} theta entries, {} defect entries",
            report.theta_history.len(),
            report.max_defect_history.len()
        )));
    }
    writeln!(w, "iteration,theta,max_defect")?;
    for (k, (t, d)) in report.theta_history.iter().zip(&report.max_defect_history).enumerate() {
        writeln!(w, "{},{},{}", k + 1, full(*t), full(*d))?;
    }
    Ok(())
}

/// Writes per-pair defects as `time_index,time,defect` rows, where `time` is
/// the left endpoint of the pair measured on `grid`.
pub fn write_report_defect_csv<W: Write>(
    w: &mut W,
    report: &MartingaleReport,
    grid: &TimeGrid,
) -> Result<()> {
    if report.defect_by_index.len() != grid.n_steps() {
        return Err(Error::Format(format!(
            "defect count {} does not match the grid's {} adjacent pairs",
            report.defect_by_index.len(),
            grid.n_steps()
        )));
    }
    let times = grid.times();
    writeln!(w, "time_index,time,defect")?;
    for (i, d) in report.defect_by_index.iter().enumerate() {
        writeln!(w, "{i},{},{}", full(times[i]), full(*d))?;
    }
    Ok(())
}
