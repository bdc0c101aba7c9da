//! Time discretization, price vectors, forecast-error pools and scenario
//! construction.
//!
//! A scenario price path is the pre-dispatch vector plus one sampled row of
//! forecast errors. Errors are indexed by look-ahead distance from the
//! decision time: column `h` (1-based) of a pool row is the error `h`
//! intervals ahead. A window that starts at interval `t` therefore applies
//! columns `1..=K-t+1` to the pre-dispatch suffix `t..=K`.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the probability normalization of a [`ScenarioSet`].
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Market clearing intervals of `kappa_minutes` each over a horizon of
/// `horizon` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    kappa_minutes: u32,
    horizon: usize,
}

impl TimeGrid {
    pub fn new(kappa_minutes: u32, horizon: usize) -> Result<Self> {
        if kappa_minutes == 0 {
            return Err(Error::Parameter(
                "interval duration must be at least one minute".into(),
            ));
        }
        if horizon == 0 {
            return Err(Error::Parameter(
                "horizon must contain at least one interval".into(),
            ));
        }
        Ok(Self {
            kappa_minutes,
            horizon,
        })
    }

    pub fn kappa_minutes(&self) -> u32 {
        self.kappa_minutes
    }

    /// Number of intervals `K`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Hours per interval. Every energy and currency quantity in the crate
    /// goes through this factor.
    pub fn hour_factor(&self) -> f64 {
        f64::from(self.kappa_minutes) / 60.0
    }

    /// Grid of the shrinking window that starts at 1-based interval `start`.
    pub fn window(&self, start: usize) -> Result<TimeGrid> {
        check_start(start, self.horizon)?;
        Ok(TimeGrid {
            kappa_minutes: self.kappa_minutes,
            horizon: self.horizon - start + 1,
        })
    }
}

fn check_start(start: usize, len: usize) -> Result<()> {
    if start == 0 || start > len {
        return Err(Error::Index { index: start, len });
    }
    Ok(())
}

/// Per-interval prices in currency per MWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceVector(Vec<f64>);

impl PriceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape("price vector is empty".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "price at period {} is not finite",
                k + 1
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if self.len() != grid.horizon() {
            return Err(Error::Shape(format!(
                "price vector has {} periods, grid has {}",
                self.len(),
                grid.horizon()
            )));
        }
        Ok(())
    }

    /// Prices for intervals `start..=K` (1-based).
    pub fn suffix(&self, start: usize) -> Result<PriceVector> {
        check_start(start, self.len())?;
        Ok(PriceVector(self.0[start - 1..].to_vec()))
    }
}

/// Historical forecast errors, one row per observation and one column per
/// look-ahead distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPool {
    data: Vec<f64>,
    observations: usize,
    lookahead: usize,
}

impl ErrorPool {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let observations = rows.len();
        if observations == 0 {
            return Err(Error::Shape("error pool has no observations".into()));
        }
        let lookahead = rows[0].len();
        if lookahead == 0 {
            return Err(Error::Shape("error pool has no look-ahead columns".into()));
        }
        let mut data = Vec::with_capacity(observations * lookahead);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != lookahead {
                return Err(Error::Shape(format!(
                    "error pool row {} has {} columns, expected {lookahead}",
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "error pool row {} is not finite",
                    i + 1
                )));
            }
            data.extend(row);
        }
        Ok(Self {
            data,
            observations,
            lookahead,
        })
    }

    pub fn zeros(observations: usize, lookahead: usize) -> Result<Self> {
        Self::from_rows(vec![vec![0.0; lookahead]; observations])
    }

    /// Number of observations `N`.
    pub fn observations(&self) -> usize {
        self.observations
    }

    /// Number of look-ahead columns `H`.
    pub fn lookahead(&self) -> usize {
        self.lookahead
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.lookahead..(i + 1) * self.lookahead]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.lookahead)
    }
}

/// Equiprobable price paths over a horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    prices: Vec<Vec<f64>>,
    probabilities: Vec<f64>,
}

impl ScenarioSet {
    pub fn new(prices: Vec<Vec<f64>>, probabilities: Vec<f64>) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::Shape("scenario set is empty".into()));
        }
        if prices.len() != probabilities.len() {
            return Err(Error::Shape(format!(
                "{} price paths but {} probabilities",
                prices.len(),
                probabilities.len()
            )));
        }
        let horizon = prices[0].len();
        if horizon == 0 {
            return Err(Error::Shape("scenario paths are empty".into()));
        }
        for (w, path) in prices.iter().enumerate() {
            if path.len() != horizon {
                return Err(Error::Shape(format!(
                    "scenario {} has {} periods, expected {horizon}",
                    w + 1,
                    path.len()
                )));
            }
            if path.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "scenario {} has a non-finite price",
                    w + 1
                )));
            }
        }
        if probabilities.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::Parameter(
                "scenario probabilities must be positive".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::Parameter(format!(
                "scenario probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            prices,
            probabilities,
        })
    }

    /// Single scenario with probability one.
    pub fn deterministic(prices: &PriceVector) -> Self {
        Self {
            prices: vec![prices.values().to_vec()],
            probabilities: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.prices[0].len()
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn path(&self, scenario: usize) -> &[f64] {
        &self.prices[scenario]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if self.horizon() != grid.horizon() {
            return Err(Error::Shape(format!(
                "scenarios cover {} periods, grid has {}",
                self.horizon(),
                grid.horizon()
            )));
        }
        Ok(())
    }

    /// Probability-weighted price per interval.
    pub fn mean_prices(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.horizon()];
        for (path, &p) in self.prices.iter().zip(&self.probabilities) {
            for (m, &price) in mean.iter_mut().zip(path) {
                *m += p * price;
            }
        }
        mean
    }

    /// Re-anchors the scenario errors at decision time `start`.
    ///
    /// Errors are recovered as `scenario - predispatch` over the full
    /// horizon, then the first `K-start+1` of them are applied to the
    /// pre-dispatch suffix. Probabilities are carried over unchanged.
    pub fn window_view(&self, predispatch: &PriceVector, start: usize) -> Result<ScenarioSet> {
        if predispatch.len() != self.horizon() {
            return Err(Error::Shape(format!(
                "pre-dispatch has {} periods, scenarios cover {}",
                predispatch.len(),
                self.horizon()
            )));
        }
        check_start(start, self.horizon())?;
        if start == 1 {
            return Ok(self.clone());
        }
        let base = predispatch.values();
        let len = self.horizon() - start + 1;
        let prices = self
            .prices
            .iter()
            .map(|path| {
                (0..len)
                    .map(|h| base[start - 1 + h] + (path[h] - base[h]))
                    .collect()
            })
            .collect();
        Ok(ScenarioSet {
            prices,
            probabilities: self.probabilities.clone(),
        })
    }
}

/// Error rows selected from a pool, kept so that every rolling window can
/// be formed exactly from the same draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSampler {
    errors: Vec<Vec<f64>>,
    probabilities: Vec<f64>,
}

impl ScenarioSampler {
    /// Draws `n` distinct observations uniformly without replacement.
    pub fn draw(pool: &ErrorPool, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("scenario count must be positive".into()));
        }
        if n > pool.observations() {
            return Err(Error::Sampling {
                requested: n,
                available: pool.observations(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked = index::sample(&mut rng, pool.observations(), n);
        let errors = picked.iter().map(|i| pool.row(i).to_vec()).collect();
        Ok(Self {
            errors,
            probabilities: vec![1.0 / n as f64; n],
        })
    }

    /// Sampler whose draw depends on the window start as well as the seed.
    pub fn draw_for_window(pool: &ErrorPool, n: usize, seed: u64, start: usize) -> Result<Self> {
        Self::draw(pool, n, window_seed(seed, start))
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn errors(&self) -> &[Vec<f64>] {
        &self.errors
    }

    /// Scenario set over intervals `start..=K` of `predispatch`.
    pub fn window(&self, predispatch: &PriceVector, start: usize) -> Result<ScenarioSet> {
        check_start(start, predispatch.len())?;
        let len = predispatch.len() - start + 1;
        let lookahead = self.errors[0].len();
        if lookahead < len {
            return Err(Error::Shape(format!(
                "error pool covers {lookahead} look-ahead steps, window needs {len}"
            )));
        }
        let base = &predispatch.values()[start - 1..];
        let prices = self
            .errors
            .iter()
            .map(|row| base.iter().zip(row).map(|(l, e)| l + e).collect())
            .collect();
        Ok(ScenarioSet {
            prices,
            probabilities: self.probabilities.clone(),
        })
    }
}

fn window_seed(seed: u64, start: usize) -> u64 {
    seed ^ (start as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Samples `n` scenarios `predispatch + error_row` with probability `1/n`.
pub fn build_scenarios(
    predispatch: &PriceVector,
    pool: &ErrorPool,
    n: usize,
    seed: u64,
) -> Result<ScenarioSet> {
    if pool.lookahead() < predispatch.len() {
        return Err(Error::Shape(format!(
            "error pool covers {} look-ahead steps, horizon is {}",
            pool.lookahead(),
            predispatch.len()
        )));
    }
    ScenarioSampler::draw(pool, n, seed)?.window(predispatch, 1)
}

/// Synthetic pool of zero-mean Gaussian errors whose standard deviation at
/// look-ahead `h` is `sigma0 * h^gamma`.
pub fn synth_pool(
    lookahead: usize,
    observations: usize,
    sigma0: f64,
    gamma: f64,
    seed: u64,
) -> Result<ErrorPool> {
    if !(sigma0 >= 0.0 && sigma0.is_finite()) {
        return Err(Error::Parameter(format!(
            "sigma0 must be non-negative, got {sigma0}"
        )));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!(
            "gamma must be non-negative, got {gamma}"
        )));
    }
    if lookahead == 0 || observations == 0 {
        return Err(Error::Parameter("pool dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normals: Vec<Normal<f64>> = (1..=lookahead)
        .map(|h| Normal::new(0.0, sigma0 * (h as f64).powf(gamma)))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parameter(e.to_string()))?;
    let mut data = Vec::with_capacity(lookahead * observations);
    for _ in 0..observations {
        for dist in &normals {
            data.push(dist.sample(&mut rng));
        }
    }
    Ok(ErrorPool {
        data,
        observations,
        lookahead,
    })
}
