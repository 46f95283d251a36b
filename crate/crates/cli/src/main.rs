//! Command-line driver: simulate ensembles, price calls, measure martingale
//! defects, and run the adaptive drift optimizer, emitting plot-ready CSV and
//! JSON artifacts.
//!
//! Exit codes are fixed so harnesses can assert failure modes: 0 success,
//! 2 invalid configuration or arguments, 3 I/O failure, 4 Euler positivity
//! failure, 5 optimizer budget exhausted (report still written), 6 degenerate
//! diffusion.

// validation deliberately writes `!(x > 0.0)` so NaN fails closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use martopt::grid::TimeGrid;
use martopt::martingale::{
    adaptive_optimize_with, martingale_defect, MartingaleReport, OptimizerSettings,
};
use martopt::pricing::{bs_call_price, mc_call_price, CallContract};
use martopt::strategy::{gain_process, make_strategy, portfolio_value, BondCurve, Policy};
use martopt::{io as mio, sample_brownian, simulate_gbm_euler, simulate_gbm_exact, PathEnsemble};

use config::{OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "martopt",
    version,
    about = "GBM simulation, call pricing, martingale defects, and adaptive drift calibration"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a GBM price ensemble, optionally driving a trading policy
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Discretization: the lognormal exact map or Euler-Maruyama
        #[arg(long, value_enum, default_value_t = Scheme::Exact)]
        scheme: Scheme,
        /// Also emit holdings, portfolio values, and gains for a built-in
        /// policy: buy_and_hold, bond_only, threshold:LEVEL, constant_mix:W
        #[arg(long)]
        policy: Option<String>,
    },
    /// Price a European call, closed form or Monte Carlo
    Price {
        #[command(flatten)]
        common: Common,
        /// Strike; defaults to the configured initial price (at the money)
        #[arg(long)]
        strike: Option<f64>,
        /// Maturity; defaults to the configured grid horizon
        #[arg(long)]
        maturity: Option<f64>,
        #[arg(long, value_enum, default_value_t = PriceMethod::Closed)]
        method: PriceMethod,
    },
    /// Measure the martingale defect of a freshly simulated ensemble
    Defect {
        #[command(flatten)]
        common: Common,
        /// Test the raw price instead of the discounted one
        #[arg(long)]
        raw: bool,
    },
    /// Calibrate the drift shift until the defect falls below epsilon
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Drive the raw price toward a martingale (target drift 0) instead
        /// of the discounted one (target drift r)
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; omitted sections take documented defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides simulation.seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides output.directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restricts output.formats to a single format
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Exact,
    Euler,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriceMethod {
    Closed,
    Mc,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_POSITIVITY: u8 = 4;
const EXIT_EXHAUSTED: u8 = 5;
const EXIT_DEGENERATE: u8 = 6;

fn exit_for(err: &martopt::Error) -> u8 {
    use martopt::Error::*;
    match err {
        Io(_) | Json(_) | Format(_) => EXIT_IO,
        EulerPositivity { .. } => EXIT_POSITIVITY,
        DegenerateDiffusion { .. } => EXIT_DEGENERATE,
        _ => EXIT_CONFIG,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => fail(exit_for(&e), e),
    }
}

fn run(cmd: Cmd) -> martopt::Result<ExitCode> {
    match cmd {
        Cmd::Simulate { common, scheme, policy } => {
            let cfg = match load(&common) {
                Ok(cfg) => cfg,
                Err(msg) => return Ok(fail(EXIT_CONFIG, msg)),
            };
            let policy = match policy.as_deref().map(parse_policy).transpose() {
                Ok(p) => p,
                Err(msg) => return Ok(fail(EXIT_CONFIG, msg)),
            };
            cmd_simulate(&cfg, scheme, policy)
        }
        Cmd::Price { common, strike, maturity, method } => {
            let cfg = match load(&common) {
                Ok(cfg) => cfg,
                Err(msg) => return Ok(fail(EXIT_CONFIG, msg)),
            };
            cmd_price(&cfg, strike, maturity, method)
        }
        Cmd::Defect { common, raw } => {
            let cfg = match load(&common) {
                Ok(cfg) => cfg,
                Err(msg) => return Ok(fail(EXIT_CONFIG, msg)),
            };
            cmd_defect(&cfg, raw)
        }
        Cmd::Optimize { common, raw } => {
            let cfg = match load(&common) {
                Ok(cfg) => cfg,
                Err(msg) => return Ok(fail(EXIT_CONFIG, msg)),
            };
            cmd_optimize(&cfg, raw)
        }
    }
}

/// Loads the config file (or defaults) and applies flag overrides.
fn load(common: &Common) -> Result<RunConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.directory = out.clone();
    }
    if let Some(format) = common.format {
        cfg.output.formats = vec![format];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_policy(raw: &str) -> Result<Policy, String> {
    let (name, arg) = match raw.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (raw, None),
    };
    let numeric = |what: &str| -> Result<f64, String> {
        let text = arg.ok_or_else(|| format!("policy {name} needs an argument: {name}:{what}"))?;
        let v: f64 =
            text.parse().map_err(|_| format!("policy argument {text:?} is not a number"))?;
        if !v.is_finite() {
            return Err(format!("policy argument {text:?} must be finite"));
        }
        Ok(v)
    };
    match name {
        "buy_and_hold" => Ok(Policy::BuyAndHold),
        "bond_only" => Ok(Policy::BondOnly),
        "threshold" => Ok(Policy::Threshold { level: numeric("LEVEL")? }),
        "constant_mix" => Ok(Policy::ConstantMix { w: numeric("W")?, r: f64::NAN }),
        other => Err(format!(
            "unknown policy {other:?}; expected buy_and_hold, bond_only, threshold:LEVEL, or constant_mix:W"
        )),
    }
}

fn out_file(dir: &Path, name: &str) -> martopt::Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_ensemble(cfg: &RunConfig, stem: &str, ens: &PathEnsemble) -> martopt::Result<Vec<String>> {
    let dir = &cfg.output.directory;
    let mut written = Vec::new();
    if cfg.wants(OutputFormat::Csv) {
        let name = format!("{stem}.csv");
        let mut w = out_file(dir, &name)?;
        mio::write_ensemble_csv(&mut w, ens)?;
        w.flush()?;
        written.push(name);
    }
    if cfg.wants(OutputFormat::Json) {
        let name = format!("{stem}.json");
        let mut w = out_file(dir, &name)?;
        mio::write_ensemble_json(&mut w, ens)?;
        w.flush()?;
        written.push(name);
    }
    Ok(written)
}

fn announce(dir: &Path, files: &[String]) {
    for f in files {
        println!("wrote {}", dir.join(f).display());
    }
}

fn cmd_simulate(
    cfg: &RunConfig,
    scheme: Scheme,
    policy: Option<Policy>,
) -> martopt::Result<ExitCode> {
    let market = cfg.market_params()?;
    let grid = cfg.time_grid()?;
    let brownian = sample_brownian(&grid, cfg.simulation.n_paths, cfg.simulation.seed)?;
    let prices = match scheme {
        Scheme::Exact => simulate_gbm_exact(&market, &brownian)?,
        Scheme::Euler => simulate_gbm_euler(&market, &brownian)?,
    };
    let mut files = write_ensemble(cfg, "prices", &prices)?;

    if let Some(policy) = policy {
        // the constant-mix rule needs the bond rate, which lives in the config
        let policy = match policy {
            Policy::ConstantMix { w, .. } => Policy::ConstantMix { w, r: market.r },
            other => other,
        };
        let strategy = make_strategy(&policy, &prices)?;
        let bond = BondCurve::new(market.r, &grid)?;
        let dir = &cfg.output.directory;
        if cfg.wants(OutputFormat::Csv) {
            let mut w = out_file(dir, "strategy.csv")?;
            mio::write_strategy_csv(&mut w, &strategy)?;
            w.flush()?;
            files.push("strategy.csv".into());
        }
        if cfg.wants(OutputFormat::Json) {
            let mut w = out_file(dir, "strategy.json")?;
            mio::write_strategy_json(&mut w, &strategy, prices.seed())?;
            w.flush()?;
            files.push("strategy.json".into());
        }
        files.extend(write_ensemble(
            cfg,
            "portfolio",
            &portfolio_value(&strategy, &prices, &bond)?,
        )?);
        files.extend(write_ensemble(cfg, "gains", &gain_process(&strategy, &prices, &bond)?)?);
    }

    announce(&cfg.output.directory, &files);
    Ok(ExitCode::SUCCESS)
}

fn cmd_price(
    cfg: &RunConfig,
    strike: Option<f64>,
    maturity: Option<f64>,
    method: PriceMethod,
) -> martopt::Result<ExitCode> {
    let market = cfg.market_params()?;
    let contract = CallContract::new(strike.unwrap_or(market.x0), maturity.unwrap_or(cfg.grid.t))?;
    let quote = match method {
        PriceMethod::Closed => bs_call_price(&market, &contract)?,
        PriceMethod::Mc => {
            mc_call_price(&market, &contract, cfg.simulation.n_paths, cfg.simulation.seed)?
        }
    };
    let dir = &cfg.output.directory;
    let mut files = Vec::new();
    if cfg.wants(OutputFormat::Csv) {
        let mut w = out_file(dir, "quote.csv")?;
        mio::write_quote_csv(&mut w, &quote)?;
        w.flush()?;
        files.push("quote.csv".to_string());
    }
    if cfg.wants(OutputFormat::Json) {
        let mut w = out_file(dir, "quote.json")?;
        mio::write_quote_json(&mut w, &quote)?;
        w.flush()?;
        files.push("quote.json".to_string());
    }
    announce(dir, &files);
    println!("price {} (std error {})", quote.price, quote.std_error);
    Ok(ExitCode::SUCCESS)
}

fn write_report(
    cfg: &RunConfig,
    report: &MartingaleReport,
    grid: &TimeGrid,
    with_iterations: bool,
) -> martopt::Result<Vec<String>> {
    let dir = &cfg.output.directory;
    let mut files = Vec::new();
    let mut w = out_file(dir, "report.json")?;
    mio::write_report_json(&mut w, report)?;
    w.flush()?;
    files.push("report.json".to_string());
    if with_iterations {
        let mut w = out_file(dir, "iterations.csv")?;
        mio::write_report_iterations_csv(&mut w, report)?;
        w.flush()?;
        files.push("iterations.csv".to_string());
    } else {
        let mut w = out_file(dir, "defect.csv")?;
        mio::write_report_defect_csv(&mut w, report, grid)?;
        w.flush()?;
        files.push("defect.csv".to_string());
    }
    Ok(files)
}

fn cmd_defect(cfg: &RunConfig, raw: bool) -> martopt::Result<ExitCode> {
    let market = cfg.market_params()?;
    let grid = cfg.time_grid()?;
    let est = cfg.estimator_for(&market)?;
    let brownian = sample_brownian(&grid, cfg.simulation.n_paths, cfg.simulation.seed)?;
    let prices = simulate_gbm_exact(&market, &brownian)?;
    let rate = if raw { 0.0 } else { market.r };
    let report = martingale_defect(&prices, rate, &est, cfg.optimizer.epsilon)?;
    let files = write_report(cfg, &report, &grid, false)?;
    announce(&cfg.output.directory, &files);
    println!(
        "max defect {} over {} pairs ({})",
        report.max_defect,
        report.defect_by_index.len(),
        if report.converged { "below epsilon" } else { "above epsilon" }
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_optimize(cfg: &RunConfig, raw: bool) -> martopt::Result<ExitCode> {
    let market = cfg.market_params()?;
    let grid = cfg.time_grid()?;
    let est = cfg.estimator_for(&market)?;
    let settings = OptimizerSettings {
        epsilon: cfg.optimizer.epsilon,
        max_iter: cfg.optimizer.max_iter,
        damping: cfg.optimizer.damping,
        discounted: !raw,
    };
    let report = adaptive_optimize_with(
        &market,
        &grid,
        cfg.simulation.n_paths,
        cfg.simulation.seed,
        &est,
        settings,
    )?;
    let files = write_report(cfg, &report, &grid, true)?;
    announce(&cfg.output.directory, &files);
    println!(
        "theta {} after {} iteration(s), max defect {}",
        report.theta_history.last().copied().unwrap_or(0.0),
        report.iterations,
        report.max_defect
    );
    if report.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "did not reach epsilon = {} within {} iteration(s)",
            report.epsilon, cfg.optimizer.max_iter
        );
        Ok(ExitCode::from(EXIT_EXHAUSTED))
    }
}
