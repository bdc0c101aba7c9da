//! Experiment configuration and parameter sweeps over `beta x alpha x E_M`.
//!
//! Every grid cell is independent; cells run on a rayon pool capped by the
//! `RASS_THREADS` environment variable, and results are always ordered by
//! grid index (beta outermost, capacity innermost).

pub mod data;
mod report;
pub mod synthetic;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::SolverConfig;
use crate::rass_model::{solve_rass, RassSolution, RiskParams};
use crate::rolling::{settlement_total, simulate, DispatchTrace, RollingInputs, ScenarioRefresh};
use crate::storage::StorageSpec;
use crate::time_market::{build_scenarios, ErrorPool, PriceVector, ScenarioSet, TimeGrid};

pub use report::{emit_report, ReportFiles};
pub use synthetic::{SyntheticData, SyntheticParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Static,
    Rolling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StorageSource {
    File(PathBuf),
    Inline(StorageSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFiles {
    pub predispatch: PathBuf,
    pub errors: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realized: Option<PathBuf>,
}

/// JSON experiment description. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kappa_minutes: u32,
    pub horizon: usize,
    pub storage: StorageSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataFiles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticParams>,
    pub beta_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    #[serde(default)]
    pub e_max_grid: Vec<f64>,
    pub n_scenarios: usize,
    pub seed: u64,
    #[serde(default)]
    pub refresh: ScenarioRefresh,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Set in run manifests; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rass_version: Option<String>,
}

impl ExperimentConfig {
    /// Parses a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = std::fs::canonicalize(if base.as_os_str().is_empty() {
            Path::new(".")
        } else {
            &base
        })
        .map_err(|e| Error::io(&base, e))?;
        cfg.resolve_paths(&base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let StorageSource::File(p) = &mut self.storage {
            fix(p);
        }
        if let Some(d) = &mut self.data {
            fix(&mut d.predispatch);
            fix(&mut d.errors);
            if let Some(r) = &mut d.realized {
                fix(r);
            }
        }
        if let Some(o) = &mut self.output_dir {
            fix(o);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        TimeGrid::new(self.kappa_minutes, self.horizon)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.beta_grid.is_empty() || self.alpha_grid.is_empty() {
            return bad("beta_grid and alpha_grid must be non-empty");
        }
        for &b in &self.beta_grid {
            for &a in &self.alpha_grid {
                RiskParams::new(a, b).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        if self
            .e_max_grid
            .iter()
            .any(|e| !(*e >= 0.0 && e.is_finite()))
        {
            return bad("e_max_grid values must be finite and non-negative");
        }
        if self.n_scenarios == 0 {
            return bad("n_scenarios must be positive");
        }
        match (&self.data, &self.synthetic) {
            (Some(_), Some(_)) => return bad("give either `data` or `synthetic`, not both"),
            (None, None) => return bad("one of `data` or `synthetic` is required"),
            _ => {}
        }
        self.solver
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.kappa_minutes, self.horizon)
    }

    /// Reads or generates every input the experiment needs.
    pub fn load_inputs(&self) -> Result<ExperimentInputs> {
        let grid = self.grid()?;
        let storage = match &self.storage {
            StorageSource::Inline(s) => *s,
            StorageSource::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::parse(p, e))?
            }
        };
        let (predispatch, pool, realized) = match (&self.data, &self.synthetic) {
            (Some(d), _) => (
                data::read_prices(&d.predispatch)?,
                data::read_errors(&d.errors)?,
                d.realized.as_deref().map(data::read_prices).transpose()?,
            ),
            (None, Some(s)) => {
                let syn = synthetic::synthesize(&grid, s)?;
                (syn.predispatch, syn.pool, Some(syn.realized))
            }
            (None, None) => return Err(Error::Config("no price data configured".into())),
        };
        predispatch
            .check_grid(&grid)
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(r) = &realized {
            r.check_grid(&grid)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if pool.lookahead() < grid.horizon() {
            return Err(Error::Config(format!(
                "error pool has {} look-ahead columns, horizon needs {}",
                pool.lookahead(),
                grid.horizon()
            )));
        }
        Ok(ExperimentInputs {
            grid,
            storage,
            predispatch,
            pool,
            realized,
        })
    }

    /// Every grid cell in output order.
    pub fn cells(&self) -> Vec<CellKey> {
        let caps: Vec<Option<f64>> = if self.e_max_grid.is_empty() {
            vec![None]
        } else {
            self.e_max_grid.iter().copied().map(Some).collect()
        };
        let mut out = Vec::new();
        for &beta in &self.beta_grid {
            for &alpha in &self.alpha_grid {
                for &e_max in &caps {
                    out.push(CellKey { beta, alpha, e_max });
                }
            }
        }
        out
    }

    /// Copy suitable for a run manifest: absolute paths, no output
    /// directory, and the crate version stamped in.
    pub fn manifest(&self) -> Self {
        let mut m = self.clone();
        m.output_dir = None;
        m.rass_version = Some(env!("CARGO_PKG_VERSION").to_string());
        m
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentInputs {
    pub grid: TimeGrid,
    pub storage: StorageSpec,
    pub predispatch: PriceVector,
    pub pool: ErrorPool,
    pub realized: Option<PriceVector>,
}

impl ExperimentInputs {
    fn spec_for(&self, key: &CellKey) -> Result<StorageSpec> {
        match key.e_max {
            Some(e) => self.storage.with_capacity(e),
            None => Ok(self.storage),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellKey {
    pub beta: f64,
    pub alpha: f64,
    pub e_max: Option<f64>,
}

impl CellKey {
    pub fn risk(&self) -> Result<RiskParams> {
        RiskParams::new(self.alpha, self.beta)
    }

    /// Label such as `beta_0.1_alpha_0.95_emax_8`.
    pub fn label(&self) -> String {
        let mut s = format!("beta_{}_alpha_{}", self.beta, self.alpha);
        if let Some(e) = self.e_max {
            s.push_str(&format!("_emax_{e}"));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct StaticCell {
    pub key: CellKey,
    pub solution: RassSolution,
}

#[derive(Debug, Clone)]
pub struct RollingCell {
    pub key: CellKey,
    pub trace: DispatchTrace,
}

/// One summary record per grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellRecord {
    pub key: CellKey,
    /// Ex-ante expected profit: the full-horizon solve in static mode, the
    /// first window in rolling mode.
    pub expected_profit: f64,
    pub cvar_cost: f64,
    pub objective: f64,
    /// Realized settlement; rolling mode only.
    pub realized_settlement: Option<f64>,
    pub nodes: u64,
}

#[derive(Debug, Clone)]
pub enum SweepOutput {
    Static(Vec<StaticCell>),
    Rolling(Vec<RollingCell>),
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub grid: TimeGrid,
    pub output: SweepOutput,
}

impl SweepResult {
    pub fn records(&self) -> Vec<CellRecord> {
        match &self.output {
            SweepOutput::Static(cells) => cells
                .iter()
                .map(|c| CellRecord {
                    key: c.key,
                    expected_profit: c.solution.expected_profit,
                    cvar_cost: c.solution.cvar_cost,
                    objective: c.solution.objective,
                    realized_settlement: None,
                    nodes: c.solution.nodes,
                })
                .collect(),
            SweepOutput::Rolling(cells) => cells
                .iter()
                .map(|c| {
                    let first = c.trace.first_window();
                    CellRecord {
                        key: c.key,
                        expected_profit: first.expected_profit,
                        cvar_cost: first.cvar_cost,
                        objective: first.objective,
                        realized_settlement: Some(settlement_total(&c.trace)),
                        nodes: c.trace.total_nodes(),
                    }
                })
                .collect(),
        }
    }

    /// Net discharge `p_d - p_c` per interval, one series per cell.
    pub fn net_discharge(&self) -> Vec<(CellKey, Vec<f64>)> {
        match &self.output {
            SweepOutput::Static(cells) => cells
                .iter()
                .map(|c| {
                    (
                        c.key,
                        c.solution
                            .dispatch
                            .iter()
                            .map(|d| d.net_discharge())
                            .collect(),
                    )
                })
                .collect(),
            SweepOutput::Rolling(cells) => cells
                .iter()
                .map(|c| (c.key, c.trace.rows.iter().map(|r| r.p_d - r.p_c).collect()))
                .collect(),
        }
    }
}

/// Worker count from `RASS_THREADS`, or `None` for the rayon default.
pub fn thread_limit() -> Option<usize> {
    std::env::var("RASS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn run_cells<T, F>(cells: &[CellKey], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&CellKey) -> Result<T> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|key| {
                f(key).map_err(|e| Error::Cell {
                    cell: key.label(),
                    source: Box::new(e),
                })
            })
            .collect()
    })
}

fn scenario_set(config: &ExperimentConfig, inputs: &ExperimentInputs) -> Result<ScenarioSet> {
    build_scenarios(
        &inputs.predispatch,
        &inputs.pool,
        config.n_scenarios,
        config.seed,
    )
}

/// One full-horizon RASS solve per grid cell, all on the same scenario draw.
pub fn run_static(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let inputs = config.load_inputs()?;
    let scenarios = scenario_set(config, &inputs)?;
    let cells = run_cells(&config.cells(), |key| {
        let spec = inputs.spec_for(key)?;
        let solution = solve_rass(
            &spec,
            &inputs.grid,
            &scenarios,
            &key.risk()?,
            &config.solver,
        )?;
        Ok(StaticCell {
            key: *key,
            solution,
        })
    })?;
    Ok(SweepResult {
        config: config.clone(),
        grid: inputs.grid,
        output: SweepOutput::Static(cells),
    })
}

/// One rolling simulation per grid cell.
pub fn run_rolling(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let inputs = config.load_inputs()?;
    let realized = inputs
        .realized
        .clone()
        .ok_or_else(|| Error::Config("rolling mode needs realized prices".into()))?;
    let cells = run_cells(&config.cells(), |key| {
        let spec = inputs.spec_for(key)?;
        let trace = simulate(&RollingInputs {
            spec: &spec,
            grid: &inputs.grid,
            predispatch: &inputs.predispatch,
            pool: &inputs.pool,
            realized: &realized,
            risk: key.risk()?,
            n_scenarios: config.n_scenarios,
            seed: config.seed,
            refresh: config.refresh,
            config: &config.solver,
        })?;
        Ok(RollingCell { key: *key, trace })
    })?;
    Ok(SweepResult {
        config: config.clone(),
        grid: inputs.grid,
        output: SweepOutput::Rolling(cells),
    })
}

/// Runs the sweep in the mode named by the config.
pub fn run(config: &ExperimentConfig) -> Result<SweepResult> {
    match config.mode {
        Mode::Static => run_static(config),
        Mode::Rolling => run_rolling(config),
    }
}
