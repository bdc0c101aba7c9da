//! Shrinking-horizon dispatch simulation.
//!
//! At each interval `t` the scheduler solves the RASS problem over
//! `t..=K` starting from the energy carried so far, commits only the first
//! interval of that solution, and settles it at the realized price.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::{SolveStatus, SolverConfig};
use crate::rass_model::{solve_rass, RiskParams};
use crate::storage::{DispatchPoint, StorageSpec};
use crate::time_market::{ErrorPool, PriceVector, ScenarioSampler, TimeGrid};

/// Whether each window reuses the first draw of error observations or
/// draws its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioRefresh {
    #[default]
    Fixed,
    PerWindow,
}

#[derive(Debug, Clone)]
pub struct RollingInputs<'a> {
    pub spec: &'a StorageSpec,
    pub grid: &'a TimeGrid,
    pub predispatch: &'a PriceVector,
    pub pool: &'a ErrorPool,
    pub realized: &'a PriceVector,
    pub risk: RiskParams,
    pub n_scenarios: usize,
    pub seed: u64,
    pub refresh: ScenarioRefresh,
    pub config: &'a SolverConfig,
}

/// Solver summary of the window whose first interval was committed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub objective: f64,
    pub expected_profit: f64,
    pub cvar_cost: f64,
    pub status: SolveStatus,
    /// Best bound reported by the solver.
    pub bound: f64,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub period: usize,
    pub p_c: f64,
    pub p_d: f64,
    pub u: bool,
    pub e_end: f64,
    pub realized_price: f64,
    pub cashflow: f64,
    pub window: WindowStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchTrace {
    pub grid: TimeGrid,
    pub rows: Vec<TraceRow>,
}

pub const TRACE_HEADER: &str =
    "period,p_charge_mw,p_discharge_mw,e_end_mwh,realized_price,cashflow";

impl DispatchTrace {
    pub fn dispatch(&self) -> Vec<DispatchPoint> {
        self.rows
            .iter()
            .map(|r| DispatchPoint {
                p_c: r.p_c,
                p_d: r.p_d,
                u: r.u,
                e_end: r.e_end,
            })
            .collect()
    }

    /// Stats of the first window, i.e. the ex-ante view of the whole day.
    pub fn first_window(&self) -> WindowStats {
        self.rows[0].window
    }

    pub fn total_nodes(&self) -> u64 {
        self.rows.iter().map(|r| r.window.nodes).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                r.period,
                unsigned_zero(r.p_c),
                unsigned_zero(r.p_d),
                unsigned_zero(r.e_end),
                unsigned_zero(r.realized_price),
                unsigned_zero(r.cashflow)
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn unsigned_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Runs the rolling simulation over every interval of the grid.
pub fn simulate(inputs: &RollingInputs<'_>) -> Result<DispatchTrace> {
    let RollingInputs {
        spec,
        grid,
        predispatch,
        pool,
        realized,
        risk,
        n_scenarios,
        seed,
        refresh,
        config,
    } = inputs.clone();
    spec.validate()?;
    risk.validate()?;
    predispatch.check_grid(grid)?;
    realized.check_grid(grid)?;
    if pool.lookahead() < grid.horizon() {
        return Err(Error::Shape(format!(
            "error pool covers {} look-ahead steps, horizon is {}",
            pool.lookahead(),
            grid.horizon()
        )));
    }
    let fixed = ScenarioSampler::draw(pool, n_scenarios, seed)?;
    let hours = grid.hour_factor();
    let mut carried = spec.e_init;
    let mut rows = Vec::with_capacity(grid.horizon());

    for t in 1..=grid.horizon() {
        let sampler = match refresh {
            ScenarioRefresh::Fixed => None,
            ScenarioRefresh::PerWindow => Some(ScenarioSampler::draw_for_window(
                pool,
                n_scenarios,
                seed,
                t,
            )?),
        };
        let scenarios = sampler.as_ref().unwrap_or(&fixed).window(predispatch, t)?;
        let window_grid = grid.window(t)?;
        let window_spec = spec.with_initial_energy(carried)?;
        let sol =
            solve_rass(&window_spec, &window_grid, &scenarios, &risk, config).map_err(|e| {
                Error::Window {
                    window: t,
                    source: Box::new(e),
                }
            })?;
        let first = sol.dispatch[0];
        let e_end = spec
            .next_energy(carried, first.p_c, first.p_d, hours)
            .clamp(spec.e_min, spec.e_max);
        let price = realized.values()[t - 1];
        rows.push(TraceRow {
            period: t,
            p_c: first.p_c,
            p_d: first.p_d,
            u: first.u,
            e_end,
            realized_price: price,
            cashflow: price * (first.p_d - first.p_c) * hours,
            window: WindowStats {
                objective: sol.objective,
                expected_profit: sol.expected_profit,
                cvar_cost: sol.cvar_cost,
                status: sol.status,
                bound: sol.bound,
                nodes: sol.nodes,
            },
        });
        carried = e_end;
    }
    Ok(DispatchTrace { grid: *grid, rows })
}

/// Realized settlement over the whole trace.
pub fn settlement_total(trace: &DispatchTrace) -> f64 {
    trace.rows.iter().map(|r| r.cashflow).sum()
}
