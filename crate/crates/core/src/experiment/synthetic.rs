//! Synthetic market data: a daily pre-dispatch profile with a shallow early
//! dip, a deeper mid-horizon trough and an evening peak, Gaussian forecast
//! errors whose spread grows with look-ahead, and a realized path drawn from
//! the same error model.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::storage::StorageSpec;
use crate::time_market::{synth_pool, ErrorPool, PriceVector, TimeGrid};

/// Seed of the committed benchmark.
pub const BENCHMARK_SEED: u64 = 42;

/// Pre-dispatch price of a stylized day, sampled at interval midpoints.
pub fn daily_profile(grid: &TimeGrid) -> PriceVector {
    let k_len = grid.horizon() as f64;
    let values = (0..grid.horizon())
        .map(|k| {
            let x = (k as f64 + 0.5) / k_len;
            let bump = |centre: f64, width: f64| (-((x - centre) / width).powi(2)).exp();
            45.0 - 15.0 * bump(0.1, 0.12) - 25.0 * bump(0.5, 0.1) + 100.0 * bump(0.8, 0.07)
        })
        .collect();
    PriceVector::new(values).expect("profile values are finite")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticParams {
    pub observations: usize,
    pub sigma0: f64,
    pub gamma: f64,
    pub seed: u64,
    /// Realized prices equal the pre-dispatch profile when false, otherwise
    /// they carry an independent error path.
    #[serde(default)]
    pub noisy_realized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub predispatch: PriceVector,
    pub pool: ErrorPool,
    pub realized: PriceVector,
}

pub fn synthesize(grid: &TimeGrid, params: &SyntheticParams) -> Result<SyntheticData> {
    let predispatch = daily_profile(grid);
    let pool = synth_pool(
        grid.horizon(),
        params.observations,
        params.sigma0,
        params.gamma,
        params.seed,
    )?;
    let realized = if params.noisy_realized {
        let path = synth_pool(
            grid.horizon(),
            1,
            params.sigma0,
            params.gamma,
            params.seed ^ 0x5EED,
        )?;
        PriceVector::new(
            predispatch
                .values()
                .iter()
                .zip(path.row(0))
                .map(|(l, e)| l + e)
                .collect(),
        )?
    } else {
        predispatch.clone()
    };
    Ok(SyntheticData {
        predispatch,
        pool,
        realized,
    })
}

/// Half-hourly day with 2,000 synthetic error observations,
/// `sigma_h = 3 * h`.
pub fn benchmark_grid() -> TimeGrid {
    TimeGrid::new(30, 48).expect("valid grid")
}

pub fn benchmark_params() -> SyntheticParams {
    SyntheticParams {
        observations: 2000,
        sigma0: 3.0,
        gamma: 1.0,
        seed: BENCHMARK_SEED,
        noisy_realized: true,
    }
}

pub fn benchmark() -> SyntheticData {
    synthesize(&benchmark_grid(), &benchmark_params()).expect("benchmark parameters are valid")
}

/// 30 MW / 8 MWh battery, starting empty.
pub fn escri_spec() -> StorageSpec {
    StorageSpec::new(30.0, 30.0, 0.85, 0.0, 8.0, 0.0).expect("valid spec")
}

/// 300 MW / 450 MWh battery, starting empty.
pub fn big_battery_spec() -> StorageSpec {
    StorageSpec::new(300.0, 300.0, 0.85, 0.0, 450.0, 0.0).expect("valid spec")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_has_a_midday_trough_and_evening_peak() {
        let p = daily_profile(&benchmark_grid());
        let v = p.values();
        let (imin, _) = v
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let (imax, _) = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((20..28).contains(&imin), "trough at {imin}");
        assert!((36..42).contains(&imax), "peak at {imax}");
    }

    #[test]
    fn benchmark_is_deterministic() {
        assert_eq!(benchmark(), benchmark());
    }
}
