//! Closed-form sojourn times and the value of priority in the two-class
//! preemptive M/M/1 queue.
//!
//! A fraction `q` of arrivals belongs to the premium class, which has
//! preemptive priority over the ordinary class. Within a class service is
//! FCFS. All times are sojourn times (service inclusive).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Utilization values at or above `1 - RHO_MARGIN` are rejected.
pub const RHO_MARGIN: f64 = 1e-12;

/// Arrival rate, service rate and the derived utilization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct QueueParams {
    lambda: f64,
    mu: f64,
    rho: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    lambda: f64,
    mu: f64,
}

impl TryFrom<RawParams> for QueueParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        QueueParams::new(raw.lambda, raw.mu)
    }
}

impl From<QueueParams> for RawParams {
    fn from(p: QueueParams) -> Self {
        RawParams {
            lambda: p.lambda,
            mu: p.mu,
        }
    }
}

impl QueueParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "arrival rate must be positive and finite, got {lambda}"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParams(format!(
                "service rate must be positive and finite, got {mu}"
            )));
        }
        let rho = lambda / mu;
        if rho >= 1.0 - RHO_MARGIN {
            return Err(Error::InvalidParams(format!(
                "utilization {rho} is not below 1 (unstable queue)"
            )));
        }
        Ok(Self { lambda, mu, rho })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Mean sojourn of a premium customer, `1 / (mu (1 - q rho))`.
    pub fn mean_wait_premium(&self, q: PremiumFraction) -> f64 {
        1.0 / (self.mu * (1.0 - q.0 * self.rho))
    }

    /// Mean sojourn of an ordinary customer, `1 / (mu (1 - rho)(1 - q rho))`.
    pub fn mean_wait_ordinary(&self, q: PremiumFraction) -> f64 {
        1.0 / (self.mu * (1.0 - self.rho) * (1.0 - q.0 * self.rho))
    }

    /// Time saved by switching from ordinary to premium when a fraction `q`
    /// of the population is premium. Strictly increasing in `q`.
    pub fn priority_value(&self, q: PremiumFraction) -> f64 {
        self.value_at(q.0)
    }

    /// `priority_value` for a fraction already known to lie in `[0, 1]`.
    pub(crate) fn value_at(&self, q: f64) -> f64 {
        self.rho / (self.mu * (1.0 - self.rho) * (1.0 - q * self.rho))
    }

    /// `(f(0), f(1))`: the value of priority when nobody else and when
    /// everybody else holds it.
    pub fn value_bounds(&self) -> (f64, f64) {
        (self.value_at(0.0), self.value_at(1.0))
    }

    /// FCFS M/M/1 mean sojourn `1 / (mu (1 - rho))`.
    pub fn fcfs_sojourn(&self) -> f64 {
        1.0 / (self.mu * (1.0 - self.rho))
    }
}

/// Share of customers holding priority, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PremiumFraction(f64);

impl PremiumFraction {
    pub const NONE: PremiumFraction = PremiumFraction(0.0);
    pub const ALL: PremiumFraction = PremiumFraction(1.0);

    pub fn new(q: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&q) {
            Ok(Self(q))
        } else {
            Err(Error::InvalidFraction(q))
        }
    }

    /// Clamps a computed fraction into `[0, 1]` (NaN maps to 0).
    pub fn clamped(q: f64) -> Self {
        if q.is_nan() {
            Self(0.0)
        } else {
            Self(q.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PremiumFraction {
    type Error = Error;
    fn try_from(q: f64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<PremiumFraction> for f64 {
    fn from(q: PremiumFraction) -> f64 {
        q.0
    }
}
