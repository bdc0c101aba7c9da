//! Fixtures shared by the solver benchmarks.

use rass_core::experiment::synthetic;
use rass_core::{build_scenarios, RiskParams, ScenarioSet, StorageSpec, TimeGrid};

/// Full-horizon benchmark problem: grid, storage, sampled scenarios, risk.
pub fn benchmark_problem(
    n_scenarios: usize,
    beta: f64,
) -> (TimeGrid, StorageSpec, ScenarioSet, RiskParams) {
    let data = synthetic::benchmark();
    let scenarios = build_scenarios(
        &data.predispatch,
        &data.pool,
        n_scenarios,
        synthetic::BENCHMARK_SEED,
    )
    .expect("benchmark scenarios");
    (
        synthetic::benchmark_grid(),
        synthetic::escri_spec(),
        scenarios,
        RiskParams::new(0.95, beta).expect("risk"),
    )
}
