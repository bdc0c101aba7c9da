mod common;

use rand::Rng;
use rass_core::rass_model::charging_costs;
use rass_core::{
    assemble_rass, check_feasible, cvar_discrete, expected_profit, solve_rass, PriceVector,
    RiskParams, ScenarioSet, SolverConfig, StorageSpec, TimeGrid,
};

fn one_scenario(prices: &[f64]) -> ScenarioSet {
    ScenarioSet::deterministic(&PriceVector::new(prices.to_vec()).unwrap())
}

#[test]
fn single_interval_from_empty_stays_idle() {
    let spec = StorageSpec::new(5.0, 5.0, 0.9, 0.0, 10.0, 0.0).unwrap();
    let grid = TimeGrid::new(60, 1).unwrap();
    let sol = solve_rass(
        &spec,
        &grid,
        &one_scenario(&[40.0]),
        &RiskParams::new(0.9, 0.2).unwrap(),
        &SolverConfig::default(),
    )
    .unwrap();
    assert_eq!(sol.dispatch[0].p_c, 0.0);
    assert_eq!(sol.dispatch[0].p_d, 0.0);
    assert!(sol.objective.abs() < 1e-9);
}

#[test]
fn lossless_two_interval_cycle_earns_the_spread() {
    let spec = StorageSpec::new(1.0, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
    let grid = TimeGrid::new(60, 2).unwrap();
    let sol = solve_rass(
        &spec,
        &grid,
        &one_scenario(&[10.0, 20.0]),
        &RiskParams::new(0.5, 0.0).unwrap(),
        &SolverConfig::default(),
    )
    .unwrap();
    assert!((sol.expected_profit - 10.0).abs() < 1e-9);
    assert!((sol.dispatch[0].p_c - 1.0).abs() < 1e-9);
    assert!((sol.dispatch[1].p_d - 1.0).abs() < 1e-9);
}

#[test]
fn lossy_cycle_is_limited_by_round_trip_efficiency() {
    // Charge 1 MWh at 10, discharge 0.85^2 MWh at 20.
    let spec = StorageSpec::new(1.0, 1.0, 0.85, 0.0, 1.0, 0.0).unwrap();
    let grid = TimeGrid::new(60, 2).unwrap();
    let sol = solve_rass(
        &spec,
        &grid,
        &one_scenario(&[10.0, 20.0]),
        &RiskParams::new(0.5, 0.0).unwrap(),
        &SolverConfig::default(),
    )
    .unwrap();
    let want = 20.0 * 0.85 * 0.85 - 10.0 / 0.85 * 0.85;
    assert!(
        (sol.expected_profit - want).abs() < 1e-9,
        "{}",
        sol.expected_profit
    );
    assert!((sol.expected_profit - 4.45).abs() < 1e-9);
}

#[test]
fn objective_splits_into_profit_and_weighted_tail_cost() {
    let config = SolverConfig::default();
    let mut rng = common::rng(21);
    for _ in 0..40 {
        let grid = common::random_grid(&mut rng, 8);
        let spec = common::random_spec(&mut rng);
        let count = rng.random_range(1..=8);
        let set = common::random_scenarios(&mut rng, grid.horizon(), count);
        let risk = common::random_risk(&mut rng);
        let sol = solve_rass(&spec, &grid, &set, &risk, &config).unwrap();
        let p = expected_profit(&sol.dispatch, &set, &grid).unwrap();
        let costs = charging_costs(&sol.dispatch, &set, &grid).unwrap();
        let r = cvar_discrete(&costs, set.probabilities(), risk.alpha)
            .unwrap()
            .value;
        let scale = 1.0 + sol.objective.abs() + p.abs();
        assert!((sol.objective - (-p + risk.beta * r)).abs() <= 1e-6 * scale);
        assert!(check_feasible(&spec, &grid, &sol.dispatch, 1e-6)
            .unwrap()
            .is_empty());

        // The excess variables are pinned at the optimum, and zeta plus the
        // scaled excess is the CVaR of the schedule.
        if risk.beta > 0.0 {
            for (z, c) in sol.z.iter().zip(&costs) {
                assert!((z - (c - sol.zeta).max(0.0)).abs() <= 1e-6 * (1.0 + c.abs()));
            }
            let tail: f64 = sol
                .z
                .iter()
                .zip(set.probabilities())
                .map(|(z, p)| z * p)
                .sum::<f64>()
                / (1.0 - risk.alpha);
            assert!(
                (sol.zeta + tail - r).abs() <= 1e-6 * (1.0 + r.abs()),
                "{} vs {r}",
                sol.zeta + tail
            );
        }
    }
}

#[test]
fn scaling_prices_scales_the_objective_and_keeps_the_mode_pattern() {
    let config = SolverConfig::default();
    let mut rng = common::rng(5);
    for _ in 0..20 {
        let grid = common::random_grid(&mut rng, 8);
        let spec = common::random_spec(&mut rng);
        let set = common::random_scenarios(&mut rng, grid.horizon(), 5);
        let risk = common::random_risk(&mut rng);
        let a = solve_rass(&spec, &grid, &set, &risk, &config).unwrap();
        for c in [0.5, 2.0, 4.0] {
            let scaled = ScenarioSet::new(
                set.prices()
                    .iter()
                    .map(|p| p.iter().map(|v| c * v).collect())
                    .collect(),
                set.probabilities().to_vec(),
            )
            .unwrap();
            let b = solve_rass(&spec, &grid, &scaled, &risk, &config).unwrap();
            assert!((b.objective - c * a.objective).abs() <= 1e-6 * (1.0 + b.objective.abs()));
            let ua: Vec<bool> = a.dispatch.iter().map(|d| d.u).collect();
            let ub: Vec<bool> = b.dispatch.iter().map(|d| d.u).collect();
            assert_eq!(ua, ub, "c = {c}");
        }
    }
}

#[test]
fn instance_dimensions_follow_horizon_and_scenarios() {
    let mut rng = common::rng(1);
    let spec = common::random_spec(&mut rng);
    for (k, w) in [(1, 1), (3, 7), (12, 20)] {
        let grid = TimeGrid::new(15, k).unwrap();
        let set = common::random_scenarios(&mut rng, k, w);
        let model = assemble_rass(&spec, &grid, &set, &RiskParams::new(0.9, 0.1).unwrap()).unwrap();
        assert_eq!(model.instance.num_cols(), 4 * k + w + 1);
        assert_eq!(model.instance.num_rows(), 3 * k + w);
        assert_eq!(model.instance.integer_cols().count(), k);
    }
}
