//! Declarative run configuration: a TOML file with dotted sections, every
//! field optional with stated defaults, so an empty file is a valid run.
//! Command-line flags override file values; the merged struct round-trips
//! through TOML without loss.

use std::path::PathBuf;

use martopt::grid::TimeGrid;
use martopt::market::MarketParams;
use martopt::martingale::CondExp;
use martopt::rng::mix64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub market: MarketSection,
    pub grid: GridSection,
    pub simulation: SimulationSection,
    pub estimator: EstimatorSection,
    pub optimizer: OptimizerSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketSection {
    pub x0: f64,
    pub mu: f64,
    pub alpha: f64,
    pub r: f64,
}

impl Default for MarketSection {
    fn default() -> Self {
        Self { x0: 100.0, mu: 0.10, alpha: 0.04, r: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    #[serde(rename = "T")]
    pub t: f64,
    pub n_steps: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { t: 1.0, n_steps: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub n_paths: usize,
    pub seed: u64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self { n_paths: 10_000, seed: 42 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMethod {
    Regression,
    NestedMc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    pub method: EstimatorMethod,
    pub basis_degree: usize,
    pub n_inner: usize,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self { method: EstimatorMethod::Regression, basis_degree: 3, n_inner: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub epsilon: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self { epsilon: 0.005, max_iter: 25, damping: 0.8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv, OutputFormat::Json],
        }
    }
}

impl RunConfig {
    /// Parses and validates a TOML config file.
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| format!("malformed config {}: {e}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.market_params().map_err(|e| e.to_string())?;
        self.time_grid().map_err(|e| e.to_string())?;
        if self.simulation.n_paths == 0 {
            return Err("simulation.n_paths must be at least 1".into());
        }
        self.estimator_for(&self.market_params().unwrap()).map_err(|e| e.to_string())?;
        if !(self.optimizer.epsilon > 0.0) {
            return Err(format!(
                "optimizer.epsilon must be positive, got {}",
                self.optimizer.epsilon
            ));
        }
        if self.optimizer.max_iter == 0 {
            return Err("optimizer.max_iter must be at least 1".into());
        }
        if !(self.optimizer.damping > 0.0 && self.optimizer.damping <= 1.0) {
            return Err(format!(
                "optimizer.damping must lie in (0, 1], got {}",
                self.optimizer.damping
            ));
        }
        if self.output.formats.is_empty() {
            return Err("output.formats must name at least one of csv, json".into());
        }
        Ok(())
    }

    pub fn market_params(&self) -> martopt::Result<MarketParams> {
        MarketParams::new(self.market.x0, self.market.mu, self.market.alpha, self.market.r)
    }

    pub fn time_grid(&self) -> martopt::Result<TimeGrid> {
        TimeGrid::uniform(self.grid.t, self.grid.n_steps)
    }

    /// Builds the configured conditional-expectation estimator. The nested
    /// variant resimulates `market` and draws from a sub-seed derived from
    /// the simulation seed, keeping inner and outer streams disjoint.
    pub fn estimator_for(&self, market: &MarketParams) -> martopt::Result<CondExp> {
        match self.estimator.method {
            EstimatorMethod::Regression => CondExp::regression(self.estimator.basis_degree),
            EstimatorMethod::NestedMc => CondExp::nested_mc(
                self.estimator.n_inner,
                *market,
                mix64(self.simulation.seed ^ 0x696e_6e65_725f_6d63), // "inner_mc"
            ),
        }
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.output.formats.contains(&format)
    }
}
