//! Pricing schemes for premium priority.
//!
//! Price-indexed schemes (flat, optimal random, discretized random) draw a
//! price from a distribution; cost-indexed schemes (the heterogeneous
//! schedule and the heterogeneous auction) charge as a function of the
//! customer's waiting-cost rate. The two auction schemes are comparison
//! baselines in which customers bid for a continuum of priority levels.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost::CostDistribution;
use crate::error::{Error, Result};
use crate::model::QueueParams;
use crate::quadrature::{self, QuadratureResult, ABS_TOL, REL_TOL};

/// One atom of a discrete price distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub price: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PriceMechanism {
    Flat {
        tau: f64,
    },
    RandomOptimal {
        params: QueueParams,
    },
    DiscreteOptimal {
        params: QueueParams,
        n: usize,
    },
    HeteroSchedule {
        params: QueueParams,
        cost_dist: CostDistribution,
    },
    AuctionHomogeneous {
        params: QueueParams,
    },
    AuctionHetero {
        params: QueueParams,
        cost_dist: CostDistribution,
    },
}

/// What a mechanism draws its price from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriceIndex {
    /// A uniform variate in `[0, 1]` (price-indexed schemes).
    Uniform(f64),
    /// The customer's waiting-cost rate (cost-indexed schemes).
    Cost(f64),
}

impl PriceMechanism {
    pub fn flat(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidMechanism(format!(
                "flat price must be finite and non-negative, got {tau}"
            )));
        }
        Ok(Self::Flat { tau })
    }

    pub fn discrete(params: QueueParams, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMechanism("discrete grid needs n >= 1".into()));
        }
        Ok(Self::DiscreteOptimal { params, n })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Flat { .. } => "flat",
            Self::RandomOptimal { .. } => "random-optimal",
            Self::DiscreteOptimal { .. } => "discrete-optimal",
            Self::HeteroSchedule { .. } => "hetero-schedule",
            Self::AuctionHomogeneous { .. } => "auction",
            Self::AuctionHetero { .. } => "auction-hetero",
        }
    }

    pub fn is_cost_indexed(&self) -> bool {
        matches!(
            self,
            Self::HeteroSchedule { .. } | Self::AuctionHetero { .. }
        )
    }

    /// Mean payment per customer when every customer pays.
    pub fn mean_payment(&self) -> Result<f64> {
        Ok(match *self {
            Self::Flat { tau } => tau,
            Self::RandomOptimal { params } => random_price_mean(&params),
            Self::DiscreteOptimal { params, n } => discrete_mean(&params, n)?,
            Self::HeteroSchedule { params, cost_dist } => hetero_profit(&params, &cost_dist)?.value,
            Self::AuctionHomogeneous { params } => auction_mean_homogeneous(&params),
            Self::AuctionHetero { params, cost_dist } => {
                auction_mean_hetero(&params, &cost_dist)?.value
            }
        })
    }

    /// The price distribution of a price-indexed scheme, for equilibrium
    /// analysis. `None` for the auction and cost-indexed schemes.
    pub fn price_distribution(&self) -> Option<Box<dyn PriceDistribution>> {
        match *self {
            Self::Flat { tau } => Some(Box::new(PointMass::new(tau))),
            Self::RandomOptimal { params } => Some(Box::new(OptimalRandomPrice::new(params))),
            Self::DiscreteOptimal { params, n } => Some(Box::new(
                DiscretePrice::new(discrete_grid(&params, n).ok()?).ok()?,
            )),
            _ => None,
        }
    }
}

/// CDF of the optimal random price:
/// `1/rho - 1/(mu (1 - rho) p)` on `[f(0), f(1)]`, 0 below and 1 above.
pub fn random_price_cdf(params: &QueueParams, p: f64) -> f64 {
    let (lo, hi) = params.value_bounds();
    if p <= lo {
        0.0
    } else if p >= hi {
        1.0
    } else {
        let rho = params.rho();
        (1.0 / rho - 1.0 / (params.mu() * (1.0 - rho) * p)).clamp(0.0, 1.0)
    }
}

/// Inverse of [`random_price_cdf`]: `rho / (mu (1 - rho)(1 - rho u))`.
pub fn random_price_quantile(params: &QueueParams, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidProbability(u));
    }
    Ok(params.value_at(u))
}

/// `-ln(1 - rho) / (mu (1 - rho))`.
pub fn random_price_mean(params: &QueueParams) -> f64 {
    let rho = params.rho();
    -(-rho).ln_1p() / (params.mu() * (1.0 - rho))
}

/// `n` equally likely prices at the lower ends of the `1/n`-probability
/// cells of the optimal random price: `p_i = F^{-1}(i / n)`, `i < n`.
pub fn discrete_grid(params: &QueueParams, n: usize) -> Result<Vec<PricePoint>> {
    if n == 0 {
        return Err(Error::InvalidArgument("discrete grid needs n >= 1".into()));
    }
    let eps = 1.0 / n as f64;
    Ok((0..n)
        .map(|i| PricePoint {
            price: params.value_at(i as f64 * eps),
            probability: eps,
        })
        .collect())
}

/// Mean of the discretized price, `eps * f(0) * sum_i 1 / (1 - rho i eps)`.
pub fn discrete_mean(params: &QueueParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("discrete grid needs n >= 1".into()));
    }
    let rho = params.rho();
    let eps = 1.0 / n as f64;
    let sum = compensated_sum((0..n).map(|i| 1.0 / (1.0 - rho * i as f64 * eps)));
    Ok(eps * params.value_at(0.0) * sum)
}

/// Upper end of the homogeneous auction payment support,
/// `1/(mu (1 - rho)^2) - 1/mu`.
pub fn auction_support_max(params: &QueueParams) -> f64 {
    let rho = params.rho();
    (1.0 / ((1.0 - rho) * (1.0 - rho)) - 1.0) / params.mu()
}

/// Equilibrium payment CDF when homogeneous customers bid for priority:
/// `1 - 1/rho + (1/rho)(1/(1 - rho)^2 - mu y)^(-1/2)` on its support.
pub fn auction_cdf_homogeneous(params: &QueueParams, y: f64) -> f64 {
    let ymax = auction_support_max(params);
    if y <= 0.0 {
        return 0.0;
    }
    if y >= ymax {
        return 1.0;
    }
    let rho = params.rho();
    let inner = 1.0 / ((1.0 - rho) * (1.0 - rho)) - params.mu() * y;
    (1.0 - 1.0 / rho + inner.powf(-0.5) / rho).clamp(0.0, 1.0)
}

/// Derivative of [`auction_cdf_homogeneous`] on the open support.
pub fn auction_density_homogeneous(params: &QueueParams, y: f64) -> f64 {
    let ymax = auction_support_max(params);
    if !(0.0..=ymax).contains(&y) {
        return 0.0;
    }
    let rho = params.rho();
    let inner = 1.0 / ((1.0 - rho) * (1.0 - rho)) - params.mu() * y;
    0.5 * params.mu() * inner.powf(-1.5) / rho
}

/// Inverse of [`auction_cdf_homogeneous`].
pub fn auction_quantile_homogeneous(params: &QueueParams, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidProbability(u));
    }
    let rho = params.rho();
    let root = 1.0 - rho + rho * u;
    let y = (1.0 / ((1.0 - rho) * (1.0 - rho)) - 1.0 / (root * root)) / params.mu();
    Ok(y.clamp(0.0, auction_support_max(params)))
}

/// `rho / (mu (1 - rho)^2)`, which coincides with `f(1)`.
pub fn auction_mean_homogeneous(params: &QueueParams) -> f64 {
    let rho = params.rho();
    rho / (params.mu() * (1.0 - rho) * (1.0 - rho))
}

/// Cost-indexed price `rho c / (mu (1 - rho)(1 - G(c) rho))`: the value of
/// priority to a type-`c` customer when exactly the cheaper types hold it.
pub fn hetero_price(params: &QueueParams, cost_dist: &CostDistribution, c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    c * params.value_at(cost_dist.cdf(c))
}

/// Expected revenue per customer of the cost-indexed schedule.
pub fn hetero_profit(
    params: &QueueParams,
    cost_dist: &CostDistribution,
) -> Result<QuadratureResult> {
    cost_dist.expect(|c| hetero_price(params, cost_dist, c), ABS_TOL, REL_TOL)
}

/// `(rho E(C) / (mu (1 - rho)), rho E(C) / (mu (1 - rho)^2))`.
pub fn hetero_profit_bounds(params: &QueueParams, cost_dist: &CostDistribution) -> (f64, f64) {
    let (lo, hi) = params.value_bounds();
    let mean = cost_dist.mean();
    (lo * mean, hi * mean)
}

fn auction_payment_hetero_tol(
    params: &QueueParams,
    cost_dist: &CostDistribution,
    c: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    let (lo, hi) = cost_dist.integration_range();
    let upper = c.min(hi);
    if upper <= lo {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let rho = params.rho();
    let scale = 2.0 * rho / params.mu();
    let r = quadrature::integrate(
        |y| {
            let d = 1.0 - cost_dist.cdf(y) * rho;
            cost_dist.pdf(y) / (d * d * d)
        },
        lo,
        upper,
        abs_tol / scale,
        rel_tol,
    )?;
    Ok(QuadratureResult {
        value: scale * r.value,
        abs_error_estimate: scale * r.abs_error_estimate,
        evaluations: r.evaluations,
    })
}

/// Equilibrium payment of a type-`c` customer when heterogeneous customers
/// bid for priority: `(2 rho / mu) int_0^c g(y) / (1 - G(y) rho)^3 dy`.
pub fn auction_payment_hetero(
    params: &QueueParams,
    cost_dist: &CostDistribution,
    c: f64,
) -> Result<QuadratureResult> {
    auction_payment_hetero_tol(params, cost_dist, c, ABS_TOL, REL_TOL)
}

/// Mean of [`auction_payment_hetero`] over `C`, by nested quadrature with
/// the inner integral ten times tighter than the outer one.
pub fn auction_mean_hetero(
    params: &QueueParams,
    cost_dist: &CostDistribution,
) -> Result<QuadratureResult> {
    let inner_error: RefCell<Option<Error>> = RefCell::new(None);
    let inner_evals = RefCell::new(0usize);
    let outer = cost_dist.expect(
        |c| match auction_payment_hetero_tol(params, cost_dist, c, ABS_TOL / 10.0, REL_TOL / 10.0) {
            Ok(r) => {
                *inner_evals.borrow_mut() += r.evaluations;
                r.value
            }
            Err(e) => {
                inner_error.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        ABS_TOL,
        REL_TOL,
    );
    if let Some(e) = inner_error.into_inner() {
        return Err(e);
    }
    let outer = outer?;
    Ok(QuadratureResult {
        evaluations: outer.evaluations + inner_evals.into_inner(),
        ..outer
    })
}

/// Draws the price a customer is asked to pay.
pub fn sample_price(mechanism: &PriceMechanism, index: PriceIndex) -> Result<f64> {
    let wrong = |expected| Error::WrongIndex {
        mechanism: mechanism.name(),
        expected,
    };
    match (*mechanism, index) {
        (PriceMechanism::Flat { tau }, PriceIndex::Uniform(u)) => {
            check_unit(u)?;
            Ok(tau)
        }
        (PriceMechanism::RandomOptimal { params }, PriceIndex::Uniform(u)) => {
            random_price_quantile(&params, u)
        }
        (PriceMechanism::DiscreteOptimal { params, n }, PriceIndex::Uniform(u)) => {
            check_unit(u)?;
            // Atom i covers (i/n, (i+1)/n].
            let i = ((u * n as f64).ceil() as usize)
                .saturating_sub(1)
                .min(n - 1);
            Ok(params.value_at(i as f64 / n as f64))
        }
        (PriceMechanism::AuctionHomogeneous { params }, PriceIndex::Uniform(u)) => {
            auction_quantile_homogeneous(&params, u)
        }
        (PriceMechanism::HeteroSchedule { params, cost_dist }, PriceIndex::Cost(c)) => {
            check_cost(c)?;
            Ok(hetero_price(&params, &cost_dist, c))
        }
        (PriceMechanism::AuctionHetero { params, cost_dist }, PriceIndex::Cost(c)) => {
            check_cost(c)?;
            Ok(auction_payment_hetero(&params, &cost_dist, c)?.value)
        }
        (m, _) if m.is_cost_indexed() => Err(wrong("a cost rate")),
        _ => Err(wrong("a uniform variate")),
    }
}

fn check_unit(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(u))
    }
}

fn check_cost(c: f64) -> Result<()> {
    if c.is_finite() && c >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "cost rate must be finite and non-negative, got {c}"
        )))
    }
}

pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

// ---------------------------------------------------------------------------
// Price distributions for equilibrium analysis
// ---------------------------------------------------------------------------

/// A distribution of offered prices on a bounded support.
pub trait PriceDistribution: Sync {
    /// `P(price <= p)`.
    fn cdf(&self, p: f64) -> f64;

    /// `P(price < p)`. Equal to `cdf` for continuous distributions.
    fn cdf_left(&self, p: f64) -> f64 {
        self.cdf(p)
    }

    /// Smallest and largest possible price.
    fn support(&self) -> (f64, f64);

    /// `inf { p : cdf(p) >= u }`, by bisection unless overridden.
    fn quantile(&self, u: f64) -> f64 {
        let (mut lo, mut hi) = self.support();
        if u <= 0.0 || self.cdf(lo) >= u {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Exact atom locations for discrete distributions.
    fn atoms(&self) -> Option<Vec<f64>> {
        None
    }
}

/// The optimal random price of a queue.
#[derive(Debug, Clone, Copy)]
pub struct OptimalRandomPrice {
    params: QueueParams,
}

impl OptimalRandomPrice {
    pub fn new(params: QueueParams) -> Self {
        Self { params }
    }
}

impl PriceDistribution for OptimalRandomPrice {
    fn cdf(&self, p: f64) -> f64 {
        random_price_cdf(&self.params, p)
    }

    fn support(&self) -> (f64, f64) {
        self.params.value_bounds()
    }

    fn quantile(&self, u: f64) -> f64 {
        self.params.value_at(u.clamp(0.0, 1.0))
    }
}

/// A single price charged to everyone.
#[derive(Debug, Clone, Copy)]
pub struct PointMass {
    price: f64,
}

impl PointMass {
    pub fn new(price: f64) -> Self {
        Self { price }
    }
}

impl PriceDistribution for PointMass {
    fn cdf(&self, p: f64) -> f64 {
        if p >= self.price {
            1.0
        } else {
            0.0
        }
    }

    fn cdf_left(&self, p: f64) -> f64 {
        if p > self.price {
            1.0
        } else {
            0.0
        }
    }

    fn support(&self) -> (f64, f64) {
        (self.price, self.price)
    }

    fn quantile(&self, _u: f64) -> f64 {
        self.price
    }

    fn atoms(&self) -> Option<Vec<f64>> {
        Some(vec![self.price])
    }
}

/// Finitely many price atoms.
#[derive(Debug, Clone)]
pub struct DiscretePrice {
    prices: Vec<f64>,
    // cumulative[k] = P(price <= prices[k])
    cumulative: Vec<f64>,
}

impl DiscretePrice {
    pub fn new(mut points: Vec<PricePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCdf("no price points".into()));
        }
        if points
            .iter()
            .any(|p| !(0.0..=1.0).contains(&p.probability) || !p.price.is_finite())
        {
            return Err(Error::InvalidCdf(
                "price points need finite prices and probabilities in [0, 1]".into(),
            ));
        }
        let total = compensated_sum(points.iter().map(|p| p.probability));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidCdf(format!(
                "price point probabilities sum to {total}, not 1"
            )));
        }
        points.sort_by(|a, b| a.price.total_cmp(&b.price));
        let mut prices: Vec<f64> = Vec::with_capacity(points.len());
        let mut masses: Vec<f64> = Vec::with_capacity(points.len());
        for p in points {
            if prices.last() == Some(&p.price) {
                *masses.last_mut().expect("parallel vecs") += p.probability;
            } else {
                prices.push(p.price);
                masses.push(p.probability);
            }
        }
        let mut acc = 0.0;
        let mut comp = 0.0;
        let cumulative = masses
            .iter()
            .map(|&m| {
                let y = m - comp;
                let t = acc + y;
                comp = (t - acc) - y;
                acc = t;
                acc.min(1.0)
            })
            .collect();
        Ok(Self { prices, cumulative })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    fn cumulative_through(&self, idx: usize) -> f64 {
        if idx == self.prices.len() - 1 {
            1.0
        } else {
            self.cumulative[idx]
        }
    }
}

impl PriceDistribution for DiscretePrice {
    fn cdf(&self, p: f64) -> f64 {
        let k = self.prices.partition_point(|&x| x <= p);
        if k == 0 {
            0.0
        } else {
            self.cumulative_through(k - 1)
        }
    }

    fn cdf_left(&self, p: f64) -> f64 {
        let k = self.prices.partition_point(|&x| x < p);
        if k == 0 {
            0.0
        } else {
            self.cumulative_through(k - 1)
        }
    }

    fn support(&self) -> (f64, f64) {
        (self.prices[0], *self.prices.last().expect("non-empty"))
    }

    fn quantile(&self, u: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < u - 1e-12);
        self.prices[k.min(self.prices.len() - 1)]
    }

    fn atoms(&self) -> Option<Vec<f64>> {
        Some(self.prices.clone())
    }
}

/// A continuous price CDF supplied as a closure over a bounded support.
pub struct CustomCdf<F> {
    cdf: F,
    support: (f64, f64),
}

impl<F: Fn(f64) -> f64 + Sync> CustomCdf<F> {
    pub fn new(cdf: F, low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low <= high) {
            return Err(Error::InvalidCdf(format!(
                "support [{low}, {high}] must be finite and ordered"
            )));
        }
        Ok(Self {
            cdf,
            support: (low, high),
        })
    }
}

impl<F: Fn(f64) -> f64 + Sync> PriceDistribution for CustomCdf<F> {
    fn cdf(&self, p: f64) -> f64 {
        (self.cdf)(p)
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }
}

// ---------------------------------------------------------------------------
// Text / structured configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    Flat,
    RandomOptimal,
    DiscreteOptimal,
    HeteroSchedule,
    Auction,
    AuctionHetero,
}

impl MechanismKind {
    fn as_str(self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::RandomOptimal => "random-optimal",
            Self::DiscreteOptimal => "discrete-optimal",
            Self::HeteroSchedule => "hetero-schedule",
            Self::Auction => "auction",
            Self::AuctionHetero => "auction-hetero",
        }
    }
}

/// Serializable description of a mechanism, independent of the queue
/// parameters it is later bound to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismSpec {
    pub kind: MechanismKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_dist: Option<CostDistribution>,
}

impl MechanismSpec {
    pub fn new(kind: MechanismKind) -> Self {
        Self {
            kind,
            tau: None,
            n: None,
            cost_dist: None,
        }
    }

    /// Binds to queue parameters. `tau`, `n` and `cost_dist`
    /// fill in fields left unset here.
    pub fn build(
        &self,
        params: QueueParams,
        tau: Option<f64>,
        n: Option<usize>,
        cost_dist: Option<CostDistribution>,
    ) -> Result<PriceMechanism> {
        let missing =
            |what: &str| Error::InvalidMechanism(format!("`{}` needs {what}", self.kind.as_str()));
        let dist = self.cost_dist.or(cost_dist);
        match self.kind {
            MechanismKind::Flat => {
                PriceMechanism::flat(self.tau.or(tau).ok_or_else(|| missing("a price tau"))?)
            }
            MechanismKind::RandomOptimal => Ok(PriceMechanism::RandomOptimal { params }),
            MechanismKind::DiscreteOptimal => PriceMechanism::discrete(
                params,
                self.n.or(n).ok_or_else(|| missing("a grid size n"))?,
            ),
            MechanismKind::HeteroSchedule => Ok(PriceMechanism::HeteroSchedule {
                params,
                cost_dist: dist.ok_or_else(|| missing("a cost distribution"))?,
            }),
            MechanismKind::Auction => Ok(PriceMechanism::AuctionHomogeneous { params }),
            MechanismKind::AuctionHetero => Ok(PriceMechanism::AuctionHetero {
                params,
                cost_dist: dist.ok_or_else(|| missing("a cost distribution"))?,
            }),
        }
    }
}

impl fmt::Display for MechanismSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.as_str())?;
        match self.kind {
            MechanismKind::Flat => {
                if let Some(tau) = self.tau {
                    write!(f, " {tau}")?;
                }
            }
            MechanismKind::DiscreteOptimal => {
                if let Some(n) = self.n {
                    write!(f, " {n}")?;
                }
            }
            MechanismKind::HeteroSchedule | MechanismKind::AuctionHetero => {
                if let Some(d) = self.cost_dist {
                    write!(f, " {d}")?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl FromStr for MechanismSpec {
    type Err = Error;

    /// `flat <tau>`, `random-optimal`, `discrete <n>`, `hetero [<dist>]`,
    /// `auction`, `auction-hetero [<dist>]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(char::is_whitespace) {
            Some((h, r)) => (h, r.trim()),
            None => (s, ""),
        };
        let kind = match head.to_ascii_lowercase().as_str() {
            "flat" => MechanismKind::Flat,
            "random-optimal" | "random" | "optimal" => MechanismKind::RandomOptimal,
            "discrete-optimal" | "discrete" => MechanismKind::DiscreteOptimal,
            "hetero-schedule" | "hetero" => MechanismKind::HeteroSchedule,
            "auction" | "auction-homogeneous" => MechanismKind::Auction,
            "auction-hetero" => MechanismKind::AuctionHetero,
            other => {
                return Err(Error::InvalidMechanism(format!(
                    "unknown mechanism `{other}`"
                )))
            }
        };
        let mut spec = MechanismSpec::new(kind);
        let bad = || Error::InvalidMechanism(format!("cannot parse `{s}`"));
        match kind {
            MechanismKind::Flat if !rest.is_empty() => {
                spec.tau = Some(rest.parse().map_err(|_| bad())?);
            }
            MechanismKind::DiscreteOptimal if !rest.is_empty() => {
                spec.n = Some(rest.parse().map_err(|_| bad())?);
            }
            MechanismKind::HeteroSchedule | MechanismKind::AuctionHetero if !rest.is_empty() => {
                spec.cost_dist = Some(rest.parse()?);
            }
            _ if !rest.is_empty() => return Err(bad()),
            _ => {}
        }
        Ok(spec)
    }
}
