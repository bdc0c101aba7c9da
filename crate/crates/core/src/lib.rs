//! Risk-averse self-scheduling of a price-taking storage resource.
//!
//! The crate builds scenario sets from pre-dispatch prices and historical
//! forecast errors, assembles the CVaR-regularized scheduling MILP, solves
//! it with a native simplex/branch-and-bound solver, and runs the
//! shrinking-horizon dispatch simulation and parameter sweeps on top.

pub mod error;
pub mod experiment;
pub mod milp;
pub mod rass_model;
pub mod rolling;
pub mod storage;
pub mod time_market;

pub use error::{Error, Result};
pub use milp::{MilpInstance, MilpSolution, SolveStatus, SolverConfig};
pub use rass_model::{
    assemble_rass, cvar_discrete, expected_profit, solve_rass, RassModel, RassSolution, RiskParams,
};
pub use rolling::{settlement_total, simulate, DispatchTrace, RollingInputs};
pub use storage::{check_feasible, DispatchPoint, StorageSpec, Violation};
pub use time_market::{
    build_scenarios, synth_pool, ErrorPool, PriceVector, ScenarioSampler, ScenarioSet, TimeGrid,
};
