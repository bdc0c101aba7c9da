//! CVaR of charging cost, expected profit, and assembly of the
//! risk-averse self-scheduling MILP.
//!
//! The problem minimizes `-profit + beta * CVaR_alpha(charging cost)` over
//! the storage constraints. CVaR enters through the Rockafellar-Uryasev
//! linearization: a free threshold `zeta` plus one non-negative excess
//! `z[w]` per scenario with `cost[w] - zeta - z[w] <= 0`. All money terms
//! are multiplied by the interval length in hours.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::{self, MilpInstance, MilpSolution, Sense, SolveStatus, SolverConfig};
use crate::storage::{DispatchPoint, StorageSpec};
use crate::time_market::{ScenarioSet, TimeGrid};

/// Confidence level `alpha` of the CVaR and its weight `beta` in the
/// objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskParams {
    pub alpha: f64,
    pub beta: f64,
}

impl RiskParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let r = Self { alpha, beta };
        r.validate()?;
        Ok(r)
    }

    pub fn risk_neutral() -> Self {
        Self {
            alpha: 0.95,
            beta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Parameter(format!(
                "beta must be non-negative, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// `1 / (1 - alpha)`.
    pub fn tail_factor(&self) -> f64 {
        1.0 / (1.0 - self.alpha)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Parameter(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// CVaR of a discrete loss distribution together with the threshold
/// `zeta` (the alpha-VaR) that attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cvar {
    pub value: f64,
    pub zeta: f64,
}

/// `min_zeta zeta + 1/(1-alpha) * sum_w p[w] * max(cost[w] - zeta, 0)`.
///
/// Evaluated in closed form: the minimum is the average of the worst
/// `1 - alpha` probability mass of the costs, and the minimizer is the cost
/// at which that mass is exhausted.
pub fn cvar_discrete(costs: &[f64], probs: &[f64], alpha: f64) -> Result<Cvar> {
    check_alpha(alpha)?;
    if costs.is_empty() || costs.len() != probs.len() {
        return Err(Error::Shape(format!(
            "{} costs with {} probabilities",
            costs.len(),
            probs.len()
        )));
    }
    if probs.iter().any(|&p| !(p >= 0.0)) || costs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Parameter(
            "costs must be finite and probabilities non-negative".into(),
        ));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!("probabilities sum to {total}")));
    }

    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]));
    let tail = 1.0 - alpha;
    let mut mass = 0.0;
    let mut weighted = 0.0;
    let mut zeta = costs[order[0]];
    for &w in &order {
        let take = probs[w].min(tail - mass).max(0.0);
        if take <= 0.0 {
            break;
        }
        weighted += take * costs[w];
        mass += take;
        zeta = costs[w];
    }
    // Rounding can leave the tail a hair short; the last cost fills it.
    weighted += (tail - mass).max(0.0) * zeta;
    Ok(Cvar {
        value: weighted / tail,
        zeta,
    })
}

/// Charging cost `sum_k price[w][k] * p_c[k] * hours` of each scenario.
pub fn charging_costs(
    dispatch: &[DispatchPoint],
    scenarios: &ScenarioSet,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    check_dims(dispatch, scenarios, grid)?;
    let h = grid.hour_factor();
    Ok(scenarios
        .prices()
        .iter()
        .map(|path| path.iter().zip(dispatch).map(|(l, d)| l * d.p_c * h).sum())
        .collect())
}

fn check_dims(dispatch: &[DispatchPoint], scenarios: &ScenarioSet, grid: &TimeGrid) -> Result<()> {
    scenarios.check_grid(grid)?;
    if dispatch.len() != grid.horizon() {
        return Err(Error::Shape(format!(
            "dispatch has {} periods, grid has {}",
            dispatch.len(),
            grid.horizon()
        )));
    }
    Ok(())
}

/// Probability-weighted arbitrage profit of a dispatch.
pub fn expected_profit(
    dispatch: &[DispatchPoint],
    scenarios: &ScenarioSet,
    grid: &TimeGrid,
) -> Result<f64> {
    check_dims(dispatch, scenarios, grid)?;
    let h = grid.hour_factor();
    Ok(scenarios
        .prices()
        .iter()
        .zip(scenarios.probabilities())
        .map(|(path, p)| {
            p * path
                .iter()
                .zip(dispatch)
                .map(|(l, d)| l * (d.p_d - d.p_c) * h)
                .sum::<f64>()
        })
        .sum())
}

/// Column ids of every named role in an assembled instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleMap {
    horizon: usize,
    scenarios: usize,
}

impl RoleMap {
    pub fn p_c(&self, k: usize) -> usize {
        k
    }
    pub fn p_d(&self, k: usize) -> usize {
        self.horizon + k
    }
    pub fn e(&self, k: usize) -> usize {
        2 * self.horizon + k
    }
    pub fn u(&self, k: usize) -> usize {
        3 * self.horizon + k
    }
    pub fn z(&self, w: usize) -> usize {
        4 * self.horizon + w
    }
    pub fn zeta(&self) -> usize {
        4 * self.horizon + self.scenarios
    }
    pub fn num_cols(&self) -> usize {
        4 * self.horizon + self.scenarios + 1
    }
    pub fn num_rows(&self) -> usize {
        3 * self.horizon + self.scenarios
    }
    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn scenarios(&self) -> usize {
        self.scenarios
    }
}

/// An assembled RASS instance with everything needed to interpret a
/// solver result.
#[derive(Debug, Clone)]
pub struct RassModel {
    pub instance: MilpInstance,
    pub roles: RoleMap,
    pub spec: StorageSpec,
    pub grid: TimeGrid,
    pub scenarios: ScenarioSet,
    pub risk: RiskParams,
}

/// Builds the RASS MILP. Column order: `p_c[1..K]`, `p_d[1..K]`,
/// `e[1..K]`, `u[1..K]`, `z[1..W]`, `zeta`. Row order: discharge limits,
/// charge limits, energy balances, CVaR excess rows.
pub fn assemble_rass(
    spec: &StorageSpec,
    grid: &TimeGrid,
    scenarios: &ScenarioSet,
    risk: &RiskParams,
) -> Result<RassModel> {
    spec.validate()?;
    risk.validate()?;
    scenarios.check_grid(grid)?;
    let k_len = grid.horizon();
    let w_len = scenarios.len();
    let h = grid.hour_factor();
    let roles = RoleMap {
        horizon: k_len,
        scenarios: w_len,
    };
    let mean = scenarios.mean_prices();
    let mut inst = MilpInstance::new();

    for (k, &m) in mean.iter().enumerate() {
        inst.add_var(format!("p_c[{}]", k + 1), 0.0, spec.p_c_max, m * h, false);
    }
    for (k, &m) in mean.iter().enumerate() {
        inst.add_var(format!("p_d[{}]", k + 1), 0.0, spec.p_d_max, -m * h, false);
    }
    for k in 0..k_len {
        inst.add_var(format!("e[{}]", k + 1), spec.e_min, spec.e_max, 0.0, false);
    }
    for k in 0..k_len {
        inst.add_binary(format!("u[{}]", k + 1), 0.0);
    }
    let tail = risk.tail_factor();
    for (w, &p) in scenarios.probabilities().iter().enumerate() {
        inst.add_var(
            format!("z[{}]", w + 1),
            0.0,
            f64::INFINITY,
            risk.beta * p * tail,
            false,
        );
    }
    inst.add_var("zeta", f64::NEG_INFINITY, f64::INFINITY, risk.beta, false);
    debug_assert_eq!(inst.num_cols(), roles.num_cols());

    for k in 0..k_len {
        inst.add_row(
            format!("dis_lim[{}]", k + 1),
            vec![(roles.p_d(k), 1.0), (roles.u(k), -spec.p_d_max)],
            Sense::Le,
            0.0,
        );
    }
    for k in 0..k_len {
        inst.add_row(
            format!("chg_lim[{}]", k + 1),
            vec![(roles.p_c(k), 1.0), (roles.u(k), spec.p_c_max)],
            Sense::Le,
            spec.p_c_max,
        );
    }
    for k in 0..k_len {
        let mut coeffs = vec![
            (roles.e(k), 1.0),
            (roles.p_d(k), h / spec.eta),
            (roles.p_c(k), -spec.eta * h),
        ];
        let rhs = if k == 0 {
            spec.e_init
        } else {
            coeffs.push((roles.e(k - 1), -1.0));
            0.0
        };
        inst.add_row(format!("balance[{}]", k + 1), coeffs, Sense::Eq, rhs);
    }
    for (w, path) in scenarios.prices().iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = path
            .iter()
            .enumerate()
            .filter(|(_, l)| **l != 0.0)
            .map(|(k, l)| (roles.p_c(k), l * h))
            .collect();
        coeffs.push((roles.zeta(), -1.0));
        coeffs.push((roles.z(w), -1.0));
        inst.add_row(format!("cvar[{}]", w + 1), coeffs, Sense::Le, 0.0);
    }
    debug_assert_eq!(inst.num_rows(), roles.num_rows());

    Ok(RassModel {
        instance: inst,
        roles,
        spec: *spec,
        grid: *grid,
        scenarios: scenarios.clone(),
        risk: *risk,
    })
}

/// Decoded optimum of a RASS instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RassSolution {
    pub dispatch: Vec<DispatchPoint>,
    pub zeta: f64,
    pub z: Vec<f64>,
    /// Solver objective, `-expected_profit + beta * cvar_cost` at optimum.
    pub objective: f64,
    pub expected_profit: f64,
    /// CVaR of the scenario charging costs of `dispatch`.
    pub cvar_cost: f64,
    pub status: SolveStatus,
    pub bound: f64,
    pub nodes: u64,
}

impl RassModel {
    /// Interprets a solver result. Tiny numerical noise is removed from the
    /// powers: values are clamped to their limits and the mode excluded by
    /// `u` is zeroed.
    pub fn decode(&self, sol: &MilpSolution) -> Result<RassSolution> {
        if !sol.has_point() {
            return Err(match sol.status {
                SolveStatus::Infeasible => Error::Solver(milp::SolverError::Malformed(
                    "RASS instance is infeasible".into(),
                )),
                s => Error::Solver(milp::SolverError::Malformed(format!(
                    "solver stopped with {s:?} before finding a schedule"
                ))),
            });
        }
        let r = &self.roles;
        let x = &sol.values;
        let dispatch: Vec<DispatchPoint> = (0..r.horizon())
            .map(|k| {
                let u = x[r.u(k)] > 0.5;
                let mut p_c = x[r.p_c(k)].clamp(0.0, self.spec.p_c_max);
                let mut p_d = x[r.p_d(k)].clamp(0.0, self.spec.p_d_max);
                if u {
                    p_c = 0.0;
                } else {
                    p_d = 0.0;
                }
                DispatchPoint {
                    p_c,
                    p_d,
                    u,
                    e_end: x[r.e(k)].clamp(self.spec.e_min, self.spec.e_max),
                }
            })
            .collect();
        let expected_profit = expected_profit(&dispatch, &self.scenarios, &self.grid)?;
        let costs = charging_costs(&dispatch, &self.scenarios, &self.grid)?;
        let cvar = cvar_discrete(&costs, self.scenarios.probabilities(), self.risk.alpha)?;
        Ok(RassSolution {
            dispatch,
            zeta: x[r.zeta()],
            z: (0..r.scenarios()).map(|w| x[r.z(w)]).collect(),
            objective: sol.objective,
            expected_profit,
            cvar_cost: cvar.value,
            status: sol.status,
            bound: sol.bound,
            nodes: sol.nodes,
        })
    }
}

/// Assembles and solves one RASS instance.
pub fn solve_rass(
    spec: &StorageSpec,
    grid: &TimeGrid,
    scenarios: &ScenarioSet,
    risk: &RiskParams,
    config: &SolverConfig,
) -> Result<RassSolution> {
    let model = assemble_rass(spec, grid, scenarios, risk)?;
    let sol = milp::solve_milp(&model.instance, config)?;
    model.decode(&sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cvar_fixtures() {
        let costs = [10.0, 20.0, 30.0, 40.0];
        let p = [0.25; 4];
        assert_eq!(cvar_discrete(&costs, &p, 0.5).unwrap().value, 35.0);
        assert_eq!(cvar_discrete(&costs, &p, 0.75).unwrap().value, 40.0);
        assert_eq!(cvar_discrete(&costs, &p, 0.0).unwrap().value, 25.0);
        assert!((cvar_discrete(&[7.5], &[1.0], 0.9).unwrap().value - 7.5).abs() < 1e-12);
        assert!(cvar_discrete(&costs, &p, 1.0).is_err());
        assert!(cvar_discrete(&costs, &p, -0.1).is_err());
    }

    #[test]
    fn risk_params_reject_alpha_one() {
        assert!(RiskParams::new(1.0, 0.2).is_err());
        assert!(RiskParams::new(0.5, -0.1).is_err());
        assert_eq!(
            RiskParams::new(0.95, 1.0).unwrap().tail_factor().round(),
            20.0
        );
    }

    fn one_cycle(kappa: u32) -> (ScenarioSet, TimeGrid, Vec<DispatchPoint>) {
        let grid = TimeGrid::new(kappa, 2).unwrap();
        let set = ScenarioSet::new(vec![vec![0.0, 10.0]], vec![1.0]).unwrap();
        let d = vec![
            DispatchPoint {
                p_c: 1.0,
                p_d: 0.0,
                u: false,
                e_end: 1.0,
            },
            DispatchPoint {
                p_c: 0.0,
                p_d: 1.0,
                u: true,
                e_end: 0.0,
            },
        ];
        (set, grid, d)
    }

    #[test]
    fn expected_profit_applies_duration() {
        let (set, grid, d) = one_cycle(60);
        assert_eq!(expected_profit(&d, &set, &grid).unwrap(), 10.0);
        let (set, grid, d) = one_cycle(30);
        assert_eq!(expected_profit(&d, &set, &grid).unwrap(), 5.0);
        let idle = vec![DispatchPoint::idle(0.0); 2];
        assert_eq!(expected_profit(&idle, &set, &grid).unwrap(), 0.0);
        assert!(expected_profit(&d[..1], &set, &grid).is_err());
    }

    #[test]
    fn full_size_dimensions_and_coefficients() {
        let grid = TimeGrid::new(30, 48).unwrap();
        let prices = vec![vec![50.0; 48]; 100];
        let set = ScenarioSet::new(prices, vec![0.01; 100]).unwrap();
        let spec = StorageSpec::new(30.0, 30.0, 0.85, 0.0, 8.0, 0.0).unwrap();
        let risk = RiskParams::new(0.95, 0.3).unwrap();
        let m = assemble_rass(&spec, &grid, &set, &risk).unwrap();
        assert_eq!(m.instance.num_cols(), 293);
        assert_eq!(m.instance.num_rows(), 244);
        let z0 = &m.instance.vars()[m.roles.z(0)];
        assert!((z0.cost - 0.3 * 0.01 * 20.0).abs() < 1e-12);
        assert_eq!(m.instance.vars()[m.roles.zeta()].cost, 0.3);
        assert!(m.instance.vars()[m.roles.zeta()].lower.is_infinite());
        for k in 0..48 {
            let u = &m.instance.vars()[m.roles.u(k)];
            assert!(u.integer && u.lower == 0.0 && u.upper == 1.0);
        }
    }

    #[test]
    fn zero_beta_leaves_risk_columns_costless() {
        let grid = TimeGrid::new(60, 3).unwrap();
        let set = ScenarioSet::new(
            vec![vec![1.0, 2.0, 3.0], vec![2.0, 2.0, 2.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let spec = StorageSpec::new(1.0, 1.0, 0.9, 0.0, 2.0, 0.0).unwrap();
        let m = assemble_rass(&spec, &grid, &set, &RiskParams::new(0.9, 0.0).unwrap()).unwrap();
        for w in 0..2 {
            assert_eq!(m.instance.vars()[m.roles.z(w)].cost, 0.0);
        }
        assert_eq!(m.instance.vars()[m.roles.zeta()].cost, 0.0);
        assert_eq!(m.instance.vars()[m.roles.p_c(0)].cost, 1.5);
        assert_eq!(m.instance.vars()[m.roles.p_d(2)].cost, -2.5);
    }

    #[test]
    fn role_map_is_a_bijection() {
        let r = RoleMap {
            horizon: 5,
            scenarios: 3,
        };
        let mut seen = vec![false; r.num_cols()];
        for k in 0..5 {
            for c in [r.p_c(k), r.p_d(k), r.e(k), r.u(k)] {
                assert!(!seen[c]);
                seen[c] = true;
            }
        }
        for w in 0..3 {
            assert!(!seen[r.z(w)]);
            seen[r.z(w)] = true;
        }
        assert!(!seen[r.zeta()]);
        seen[r.zeta()] = true;
        assert!(seen.iter().all(|s| *s));
    }
}
