//! Physical storage parameters and schedule feasibility checks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time_market::TimeGrid;

/// Power limits (MW), round-trip-symmetric efficiency and energy bounds (MWh)
/// of a storage resource.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StorageSpec {
    pub p_c_max: f64,
    pub p_d_max: f64,
    pub eta: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub e_init: f64,
}

#[derive(Deserialize)]
struct StorageFile {
    p_c_max: f64,
    p_d_max: f64,
    eta: f64,
    e_min: f64,
    e_max: f64,
    e_init: Option<f64>,
}

impl<'de> Deserialize<'de> for StorageSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let f = StorageFile::deserialize(de)?;
        // A missing initial charge means an empty battery.
        StorageSpec::new(
            f.p_c_max,
            f.p_d_max,
            f.eta,
            f.e_min,
            f.e_max,
            f.e_init.unwrap_or(f.e_min),
        )
        .map_err(serde::de::Error::custom)
    }
}

impl StorageSpec {
    pub fn new(
        p_c_max: f64,
        p_d_max: f64,
        eta: f64,
        e_min: f64,
        e_max: f64,
        e_init: f64,
    ) -> Result<Self> {
        let spec = Self {
            p_c_max,
            p_d_max,
            eta,
            e_min,
            e_max,
            e_init,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.p_c_max,
            self.p_d_max,
            self.eta,
            self.e_min,
            self.e_max,
            self.e_init,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("storage parameters must be finite".into()));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Parameter(format!(
                "efficiency {} not in (0, 1]",
                self.eta
            )));
        }
        if self.p_c_max < 0.0 || self.p_d_max < 0.0 {
            return Err(Error::Parameter("power limits must be non-negative".into()));
        }
        if !(0.0 <= self.e_min && self.e_min <= self.e_init && self.e_init <= self.e_max) {
            return Err(Error::Parameter(format!(
                "energy bounds must satisfy 0 <= e_min ({}) <= e_init ({}) <= e_max ({})",
                self.e_min, self.e_init, self.e_max
            )));
        }
        Ok(())
    }

    /// Same resource starting from a different stored energy.
    pub fn with_initial_energy(&self, e_init: f64) -> Result<Self> {
        Self::new(
            self.p_c_max,
            self.p_d_max,
            self.eta,
            self.e_min,
            self.e_max,
            e_init,
        )
    }

    /// Same resource with a different energy capacity; the initial charge is
    /// capped at the new capacity.
    pub fn with_capacity(&self, e_max: f64) -> Result<Self> {
        Self::new(
            self.p_c_max,
            self.p_d_max,
            self.eta,
            self.e_min,
            e_max,
            self.e_init.min(e_max),
        )
    }

    /// Stored energy after one interval of the given operation.
    pub fn next_energy(&self, e_prev: f64, p_c: f64, p_d: f64, hours: f64) -> f64 {
        e_prev - p_d * hours / self.eta + self.eta * p_c * hours
    }
}

/// One committed interval of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispatchPoint {
    pub p_c: f64,
    pub p_d: f64,
    /// Discharge mode flag: `true` permits discharging, `false` permits
    /// charging.
    pub u: bool,
    pub e_end: f64,
}

impl DispatchPoint {
    pub fn idle(e_end: f64) -> Self {
        Self {
            p_c: 0.0,
            p_d: 0.0,
            u: false,
            e_end,
        }
    }

    pub fn net_discharge(&self) -> f64 {
        self.p_d - self.p_c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `p_d > p_d_max * u`
    DischargeLimit,
    /// `p_c > p_c_max * (1 - u)`
    ChargeLimit,
    NegativeCharge,
    NegativeDischarge,
    /// Charging and discharging in the same interval.
    Simultaneous,
    EnergyBalance,
    EnergyBelowMin,
    EnergyAboveMax,
}

/// A constraint violation at 1-based `period`, with its magnitude in the
/// constraint's own units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub period: usize,
    pub kind: ViolationKind,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "period {}: {:?} by {:.3e}",
            self.period, self.kind, self.magnitude
        )
    }
}

/// Lists every violated power, mode, energy-balance and energy-bound
/// constraint of `points`, each checked within `tol`.
pub fn check_feasible(
    spec: &StorageSpec,
    grid: &TimeGrid,
    points: &[DispatchPoint],
    tol: f64,
) -> Result<Vec<Violation>> {
    if points.len() != grid.horizon() {
        return Err(Error::Shape(format!(
            "schedule has {} periods, grid has {}",
            points.len(),
            grid.horizon()
        )));
    }
    let hours = grid.hour_factor();
    let mut out = Vec::new();
    let mut push = |period: usize, kind: ViolationKind, magnitude: f64| {
        if magnitude > tol {
            out.push(Violation {
                period,
                kind,
                magnitude,
            });
        }
    };
    let mut e_prev = spec.e_init;
    for (i, pt) in points.iter().enumerate() {
        let period = i + 1;
        let u = if pt.u { 1.0 } else { 0.0 };
        push(
            period,
            ViolationKind::DischargeLimit,
            pt.p_d - spec.p_d_max * u,
        );
        push(
            period,
            ViolationKind::ChargeLimit,
            pt.p_c - spec.p_c_max * (1.0 - u),
        );
        push(period, ViolationKind::NegativeCharge, -pt.p_c);
        push(period, ViolationKind::NegativeDischarge, -pt.p_d);
        push(period, ViolationKind::Simultaneous, pt.p_c.min(pt.p_d));
        let expected = spec.next_energy(e_prev, pt.p_c, pt.p_d, hours);
        push(
            period,
            ViolationKind::EnergyBalance,
            (pt.e_end - expected).abs(),
        );
        push(period, ViolationKind::EnergyBelowMin, spec.e_min - pt.e_end);
        push(period, ViolationKind::EnergyAboveMax, pt.e_end - spec.e_max);
        e_prev = pt.e_end;
    }
    Ok(out)
}
