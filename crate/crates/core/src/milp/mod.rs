//! Exact desk-scale MILP solving.
//!
//! The native backend is a bounded-variable revised simplex (dense basis
//! inverse, periodic refactorization, least-index pivoting after a run of
//! degenerate steps) driven by a depth-first branch-and-bound. The external
//! backend hands the instance to a command-line solver in CPLEX LP format.

mod branch;
mod external;
mod instance;
mod lp_format;
mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use branch::{enumerate_oracle, solve_lp, solve_milp_native, MAX_ORACLE_BINARIES};
pub use external::ExternalSolver;
pub use instance::{MilpInstance, Row, Sense, Variable};
pub use lp_format::{lp_name, write_lp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error("LP relaxation is unbounded")]
    Unbounded,
    #[error("simplex iteration limit of {0} reached")]
    IterationLimit(usize),
    #[error("basis matrix became singular")]
    SingularBasis,
    #[error("enumeration oracle refuses {0} binary columns")]
    TooManyBinaries(usize),
    #[error("external solver: {0}")]
    External(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Native,
    /// Command line with `{lp}` and `{sol}` placeholders for the instance
    /// and solution file paths.
    External { command: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub feas_tol: f64,
    pub int_tol: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub node_limit: u64,
    pub time_limit: Option<f64>,
    pub backend: Backend,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            int_tol: 1e-6,
            abs_gap: 1e-6,
            rel_gap: 1e-6,
            node_limit: 1_000_000,
            time_limit: None,
            backend: Backend::Native,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let tols = [self.feas_tol, self.int_tol, self.abs_gap, self.rel_gap];
        if tols.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(SolverError::Malformed(
                "solver tolerances must be positive".into(),
            ));
        }
        if let Some(t) = self.time_limit {
            if !(t > 0.0) {
                return Err(SolverError::Malformed("time limit must be positive".into()));
            }
        }
        Ok(())
    }

    /// Pruning tolerance around an incumbent objective.
    pub fn gap_tolerance(&self, objective: f64) -> f64 {
        self.abs_gap.max(self.rel_gap * objective.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// Column values; empty when no feasible point was found.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Best proven lower bound.
    pub bound: f64,
    pub nodes: u64,
}

impl MilpSolution {
    pub(crate) fn infeasible(nodes: u64) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            values: Vec::new(),
            objective: f64::INFINITY,
            bound: f64::INFINITY,
            nodes,
        }
    }

    pub fn has_point(&self) -> bool {
        !self.values.is_empty()
    }
}

/// Solves `instance` with the backend selected in `config`.
pub fn solve_milp(
    instance: &MilpInstance,
    config: &SolverConfig,
) -> Result<MilpSolution, SolverError> {
    match &config.backend {
        Backend::Native => solve_milp_native(instance, config),
        Backend::External { command } => {
            ExternalSolver::new(command.clone()).solve(instance, config)
        }
    }
}
