mod common;

use rand::Rng;
use rass_core::rolling::ScenarioRefresh;
use rass_core::{
    check_feasible, settlement_total, simulate, solve_rass, ErrorPool, PriceVector, RiskParams,
    RollingInputs, ScenarioSet, SolverConfig, TimeGrid,
};

#[test]
fn perfect_foresight_rolling_matches_static_plan() {
    let config = SolverConfig::default();
    let mut rng = common::rng(17);
    for case in 0..10 {
        let grid = TimeGrid::new(30, 12).unwrap();
        let spec = common::random_spec(&mut rng);
        let prices =
            PriceVector::new((0..12).map(|_| rng.random_range(-10.0..100.0)).collect()).unwrap();
        let pool = ErrorPool::zeros(5, 12).unwrap();
        let beta = if case % 2 == 0 { 0.0 } else { 0.3 };
        let risk = RiskParams::new(0.9, beta).unwrap();
        let stat = solve_rass(
            &spec,
            &grid,
            &ScenarioSet::deterministic(&prices),
            &risk,
            &config,
        )
        .unwrap();
        let trace = simulate(&RollingInputs {
            spec: &spec,
            grid: &grid,
            predispatch: &prices,
            pool: &pool,
            realized: &prices,
            risk,
            n_scenarios: 3,
            seed: 1,
            refresh: ScenarioRefresh::Fixed,
            config: &config,
        })
        .unwrap();
        let settled = settlement_total(&trace);
        assert!(
            (settled - stat.expected_profit).abs() <= 1e-6 * (1.0 + settled.abs()),
            "case {case}: {settled} vs {}",
            stat.expected_profit
        );
        assert!(check_feasible(&spec, &grid, &trace.dispatch(), 1e-6)
            .unwrap()
            .is_empty());
    }
}

#[test]
fn rolling_runs_are_reproducible_and_feasible() {
    let config = SolverConfig::default();
    let mut rng = common::rng(2);
    let grid = TimeGrid::new(60, 8).unwrap();
    let spec = common::random_spec(&mut rng);
    let prices = PriceVector::new((0..8).map(|_| rng.random_range(0.0..80.0)).collect()).unwrap();
    let realized = PriceVector::new(
        prices
            .values()
            .iter()
            .map(|p| p + rng.random_range(-5.0..5.0))
            .collect(),
    )
    .unwrap();
    let pool = rass_core::synth_pool(8, 40, 4.0, 0.6, 3).unwrap();
    for refresh in [ScenarioRefresh::Fixed, ScenarioRefresh::PerWindow] {
        let inputs = RollingInputs {
            spec: &spec,
            grid: &grid,
            predispatch: &prices,
            pool: &pool,
            realized: &realized,
            risk: RiskParams::new(0.9, 0.2).unwrap(),
            n_scenarios: 10,
            seed: 12,
            refresh,
            config: &config,
        };
        let a = simulate(&inputs).unwrap();
        let b = simulate(&inputs).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(check_feasible(&spec, &grid, &a.dispatch(), 1e-6)
            .unwrap()
            .is_empty());
        let cash: f64 = a
            .rows
            .iter()
            .map(|r| r.realized_price * (r.p_d - r.p_c) * grid.hour_factor())
            .sum();
        assert!((settlement_total(&a) - cash).abs() < 1e-9);
    }
}

#[test]
fn heavy_risk_aversion_charges_less() {
    let config = SolverConfig::default();
    let grid = TimeGrid::new(60, 6).unwrap();
    let spec = rass_core::StorageSpec::new(2.0, 2.0, 0.9, 0.0, 4.0, 0.0).unwrap();
    let prices = PriceVector::new(vec![20.0, 15.0, 30.0, 60.0, 25.0, 80.0]).unwrap();
    let pool = rass_core::synth_pool(6, 30, 3.0, 0.8, 4).unwrap();
    let charged = |beta: f64| {
        let trace = simulate(&RollingInputs {
            spec: &spec,
            grid: &grid,
            predispatch: &prices,
            pool: &pool,
            realized: &prices,
            risk: RiskParams::new(0.9, beta).unwrap(),
            n_scenarios: 10,
            seed: 8,
            refresh: ScenarioRefresh::Fixed,
            config: &config,
        })
        .unwrap();
        trace.rows.iter().map(|r| r.p_c).sum::<f64>()
    };
    let neutral = charged(0.0);
    assert!(neutral > 0.0);
    assert!(charged(10.0) < neutral);
}
