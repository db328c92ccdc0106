//! Distributions of the waiting-cost rate `C` for heterogeneous customers.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureResult};

/// Upper-tail mass dropped when an unbounded support is truncated for
/// integration.
pub const TRUNCATION_TAIL: f64 = 1e-14;

/// A continuous, non-negative waiting-cost distribution with finite mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CostDistribution {
    Uniform {
        low: f64,
        high: f64,
    },
    Exponential {
        rate: f64,
    },
    /// `ln C ~ Normal(log_mean, log_sd)`.
    Lognormal {
        log_mean: f64,
        log_sd: f64,
    },
    /// `Normal(mean, sd)` conditioned on `C >= 0`.
    TruncatedNormal {
        mean: f64,
        sd: f64,
    },
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn std_normal_quantile(u: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * u)
}

fn positive_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl CostDistribution {
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low >= 0.0 && high > low) {
            return Err(Error::InvalidDistribution(format!(
                "uniform needs 0 <= low < high, got ({low}, {high})"
            )));
        }
        Ok(Self::Uniform { low, high })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !positive_finite(rate) {
            return Err(Error::InvalidDistribution(format!(
                "exponential rate must be positive, got {rate}"
            )));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn lognormal(log_mean: f64, log_sd: f64) -> Result<Self> {
        if !(log_mean.is_finite() && positive_finite(log_sd)) {
            return Err(Error::InvalidDistribution(format!(
                "lognormal needs finite log-mean and positive log-sd, got ({log_mean}, {log_sd})"
            )));
        }
        Ok(Self::Lognormal { log_mean, log_sd })
    }

    pub fn truncated_normal(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && positive_finite(sd)) {
            return Err(Error::InvalidDistribution(format!(
                "truncated normal needs finite mean and positive sd, got ({mean}, {sd})"
            )));
        }
        // Beyond ~37 sd the retained mass underflows.
        if mean / sd < -30.0 {
            return Err(Error::InvalidDistribution(format!(
                "truncated normal keeps negligible mass above 0: mean {mean}, sd {sd}"
            )));
        }
        Ok(Self::TruncatedNormal { mean, sd })
    }

    fn validate(self) -> Result<Self> {
        match self {
            Self::Uniform { low, high } => Self::uniform(low, high),
            Self::Exponential { rate } => Self::exponential(rate),
            Self::Lognormal { log_mean, log_sd } => Self::lognormal(log_mean, log_sd),
            Self::TruncatedNormal { mean, sd } => Self::truncated_normal(mean, sd),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Exponential { .. } => "exponential",
            Self::Lognormal { .. } => "lognormal",
            Self::TruncatedNormal { .. } => "truncnormal",
        }
    }

    /// Closed support; the upper end may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { low, high } => (low, high),
            _ => (0.0, f64::INFINITY),
        }
    }

    // Truncated normal: standardized lower bound and retained mass.
    fn trunc_terms(mean: f64, sd: f64) -> (f64, f64) {
        let alpha = -mean / sd;
        (alpha, std_normal_cdf(-alpha))
    }

    /// Density `g(c)`; zero outside the support.
    pub fn pdf(&self, c: f64) -> f64 {
        match *self {
            Self::Uniform { low, high } => {
                if (low..=high).contains(&c) {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            Self::Exponential { rate } => {
                if c < 0.0 {
                    0.0
                } else {
                    rate * (-rate * c).exp()
                }
            }
            Self::Lognormal { log_mean, log_sd } => {
                if c <= 0.0 {
                    0.0
                } else {
                    let z = (c.ln() - log_mean) / log_sd;
                    std_normal_pdf(z) / (c * log_sd)
                }
            }
            Self::TruncatedNormal { mean, sd } => {
                if c < 0.0 {
                    0.0
                } else {
                    let (_, mass) = Self::trunc_terms(mean, sd);
                    std_normal_pdf((c - mean) / sd) / (sd * mass)
                }
            }
        }
    }

    /// Distribution function `G(c)`.
    pub fn cdf(&self, c: f64) -> f64 {
        if c.is_nan() {
            return f64::NAN;
        }
        match *self {
            Self::Uniform { low, high } => ((c - low) / (high - low)).clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if c <= 0.0 {
                    0.0
                } else {
                    -(-rate * c).exp_m1()
                }
            }
            Self::Lognormal { log_mean, log_sd } => {
                if c <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((c.ln() - log_mean) / log_sd)
                }
            }
            Self::TruncatedNormal { mean, sd } => {
                if c <= 0.0 {
                    0.0
                } else {
                    let (_, mass) = Self::trunc_terms(mean, sd);
                    let survival = std_normal_cdf(-(c - mean) / sd) / mass;
                    (1.0 - survival).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Closed-form `E(C)`.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Uniform { low, high } => 0.5 * (low + high),
            Self::Exponential { rate } => 1.0 / rate,
            Self::Lognormal { log_mean, log_sd } => (log_mean + 0.5 * log_sd * log_sd).exp(),
            Self::TruncatedNormal { mean, sd } => {
                let (alpha, mass) = Self::trunc_terms(mean, sd);
                mean + sd * std_normal_pdf(alpha) / mass
            }
        }
    }

    /// Inverse-transform sample: the `u`-quantile of `C`.
    pub fn sample(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidProbability(u));
        }
        Ok(self.quantile(u))
    }

    fn quantile(&self, u: f64) -> f64 {
        let (lo, hi) = self.support();
        if u == 0.0 {
            return lo;
        }
        if u == 1.0 {
            return hi;
        }
        match *self {
            Self::Uniform { low, high } => low + u * (high - low),
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Lognormal { log_mean, log_sd } => {
                (log_mean + log_sd * std_normal_quantile(u)).exp()
            }
            Self::TruncatedNormal { mean, sd } => {
                let (alpha, mass) = Self::trunc_terms(mean, sd);
                let z = if u < 0.5 {
                    std_normal_quantile(std_normal_cdf(alpha) + u * mass)
                } else {
                    -std_normal_quantile((1.0 - u) * mass)
                };
                (mean + sd * z).max(0.0)
            }
        }
    }

    /// The point above which only `tail` probability mass remains.
    pub fn upper_tail_point(&self, tail: f64) -> f64 {
        match *self {
            Self::Uniform { high, .. } => high,
            Self::Exponential { rate } => -tail.ln() / rate,
            Self::Lognormal { log_mean, log_sd } => {
                (log_mean - log_sd * std_normal_quantile(tail)).exp()
            }
            Self::TruncatedNormal { mean, sd } => {
                let (_, mass) = Self::trunc_terms(mean, sd);
                (mean - sd * std_normal_quantile(tail * mass)).max(0.0)
            }
        }
    }

    /// Finite integration range: the support, truncated at the
    /// `1 - TRUNCATION_TAIL` quantile when unbounded.
    pub fn integration_range(&self) -> (f64, f64) {
        let (lo, _) = self.support();
        (lo, self.upper_tail_point(TRUNCATION_TAIL))
    }

    /// `E[h(C)]` by adaptive quadrature over the integration range.
    pub fn expect<F: Fn(f64) -> f64>(
        &self,
        h: F,
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<QuadratureResult> {
        let (lo, hi) = self.integration_range();
        quadrature::integrate(|c| h(c) * self.pdf(c), lo, hi, abs_tol, rel_tol)
    }
}

impl fmt::Display for CostDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Uniform { low, high } => write!(f, "uniform {low} {high}"),
            Self::Exponential { rate } => write!(f, "exponential {rate}"),
            Self::Lognormal { log_mean, log_sd } => write!(f, "lognormal {log_mean} {log_sd}"),
            Self::TruncatedNormal { mean, sd } => write!(f, "truncnormal {mean} {sd}"),
        }
    }
}

impl FromStr for CostDistribution {
    type Err = Error;

    /// Parses `"<family> <params...>"`, e.g. `"uniform 0 2"` or
    /// `"exponential 1.0"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let family = parts
            .next()
            .ok_or_else(|| Error::InvalidDistribution("empty distribution spec".into()))?
            .to_ascii_lowercase();
        let nums = parts
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::InvalidDistribution(format!("`{t}` is not a number in `{s}`"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let want = |n: usize| -> Result<()> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidDistribution(format!(
                    "`{family}` takes {n} parameter(s), got {}",
                    nums.len()
                )))
            }
        };
        match family.as_str() {
            "uniform" => {
                want(2)?;
                Self::uniform(nums[0], nums[1])
            }
            "exponential" | "exp" => {
                want(1)?;
                Self::exponential(nums[0])
            }
            "lognormal" => {
                want(2)?;
                Self::lognormal(nums[0], nums[1])
            }
            "truncnormal" | "truncated-normal" => {
                want(2)?;
                Self::truncated_normal(nums[0], nums[1])
            }
            "point" | "constant" | "degenerate" => Err(Error::InvalidDistribution(
                "point masses are not supported: a continuous density is required".into(),
            )),
            other => Err(Error::InvalidDistribution(format!(
                "unknown family `{other}`"
            ))),
        }
        .and_then(Self::validate)
    }
}

impl TryFrom<String> for CostDistribution {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CostDistribution> for String {
    fn from(d: CostDistribution) -> String {
        d.to_string()
    }
}
