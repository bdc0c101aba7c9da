#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rass_core::{RiskParams, ScenarioSet, StorageSpec, TimeGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random storage with energy bounds that keep the start state valid.
pub fn random_spec(rng: &mut ChaCha8Rng) -> StorageSpec {
    let p_c = rng.random_range(0.5..5.0);
    let p_d = rng.random_range(0.5..5.0);
    let eta = rng.random_range(0.7..1.0);
    let e_min = rng.random_range(0.0..1.0);
    let e_max = e_min + rng.random_range(0.5..6.0);
    let e_init = rng.random_range(e_min..=e_max);
    StorageSpec::new(p_c, p_d, eta, e_min, e_max, e_init).unwrap()
}

/// Scenario set with random prices (including negative ones) and random
/// probabilities.
pub fn random_scenarios(rng: &mut ChaCha8Rng, horizon: usize, count: usize) -> ScenarioSet {
    let base: Vec<f64> = (0..horizon)
        .map(|_| rng.random_range(-20.0..120.0))
        .collect();
    let prices = (0..count)
        .map(|_| {
            base.iter()
                .map(|b| b + rng.random_range(-30.0..30.0))
                .collect()
        })
        .collect();
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let head: f64 = probs[..count - 1].iter().sum();
    probs[count - 1] = 1.0 - head;
    ScenarioSet::new(prices, probs).unwrap()
}

pub fn random_grid(rng: &mut ChaCha8Rng, max_horizon: usize) -> TimeGrid {
    let kappa = [15u32, 30, 60][rng.random_range(0..3)];
    TimeGrid::new(kappa, rng.random_range(1..=max_horizon)).unwrap()
}

pub fn random_risk(rng: &mut ChaCha8Rng) -> RiskParams {
    RiskParams::new(rng.random_range(0.0..0.99), rng.random_range(0.0..1.0)).unwrap()
}
