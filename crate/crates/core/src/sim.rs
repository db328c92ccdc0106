//! Discrete-event simulation of the two-class preemptive-resume M/M/1
//! queue, plus Monte-Carlo estimators of mechanism revenue.
//!
//! Randomness comes from ChaCha8 with one stream per source (arrivals,
//! services, class assignment, prices), so switching pricing on or off does
//! not move the arrival and service sample paths.

use std::collections::VecDeque;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cost::CostDistribution;
use crate::error::{Error, Result};
use crate::game::{self, StrategyProfile, DEFAULT_GRID};
use crate::mechanisms::{hetero_price, sample_price, PriceIndex, PriceMechanism};
use crate::model::{PremiumFraction, QueueParams};

/// Batches per replication for batch-means standard errors.
pub const BATCHES: usize = 30;

const STREAM_ARRIVALS: u64 = 0;
const STREAM_SERVICES: u64 = 1;
const STREAM_CLASSES: u64 = 2;
const STREAM_PRICES: u64 = 3;

/// How arriving customers end up in the premium class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Assignment {
    /// Premium independently with probability `q`; nobody is charged.
    Fraction { q: PremiumFraction },
    /// Each customer is offered a price by the mechanism and buys according
    /// to the least-revenue equilibrium of the induced game.
    Mechanism { mechanism: PriceMechanism },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub params: QueueParams,
    pub assignment: Assignment,
    /// Customers whose statistics are kept, warmup included.
    pub num_customers: usize,
    /// Leading customers discarded from the statistics.
    pub warmup_customers: usize,
    pub seed: u64,
    pub replications: usize,
}

impl SimConfig {
    /// `warmup` defaults to 1% of `num_customers`; one replication.
    pub fn new(params: QueueParams, q: PremiumFraction, num_customers: usize, seed: u64) -> Self {
        Self {
            params,
            assignment: Assignment::Fraction { q },
            num_customers,
            warmup_customers: num_customers / 100,
            seed,
            replications: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_customers <= self.warmup_customers {
            return Err(Error::InvalidConfig(format!(
                "num_customers ({}) must exceed warmup_customers ({})",
                self.num_customers, self.warmup_customers
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if let Assignment::Mechanism { mechanism } = self.assignment {
            if matches!(
                mechanism,
                PriceMechanism::AuctionHomogeneous { .. } | PriceMechanism::AuctionHetero { .. }
            ) {
                return Err(Error::InvalidConfig(
                    "auction mechanisms have no two-class queue to simulate".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `(mean - target) / std_error`; 0 when both the error and the
    /// deviation vanish.
    pub fn z_score(&self, target: f64) -> f64 {
        let dev = self.mean - target;
        if self.std_error > 0.0 {
            dev / self.std_error
        } else if dev == 0.0 {
            0.0
        } else {
            dev.signum() * f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct ClassCounts {
    pub premium: usize,
    pub ordinary: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub seed: u64,
    pub replications: usize,
    pub mean_sojourn_premium: Option<Estimate>,
    pub mean_sojourn_ordinary: Option<Estimate>,
    pub mean_revenue_per_customer: Option<Estimate>,
    /// Observed (post-warmup) customers per class, summed over replications.
    pub counts: ClassCounts,
    /// Every arrival admitted, tracked or not, summed over replications.
    pub arrivals: u64,
    pub departures: u64,
    /// Customers still queued when the run stopped.
    pub in_system: u64,
}

impl SimResult {
    fn empty(seed: u64, replications: usize) -> Self {
        Self {
            seed,
            replications,
            mean_sojourn_premium: None,
            mean_sojourn_ordinary: None,
            mean_revenue_per_customer: None,
            counts: ClassCounts::default(),
            arrivals: 0,
            departures: 0,
            in_system: 0,
        }
    }
}

impl SimResult {
    pub const CSV_HEADER: &'static str = "seed,replications,premium_mean,premium_se,\
ordinary_mean,ordinary_se,revenue_mean,revenue_se,premium_count,ordinary_count,\
arrivals,departures,in_system";

    /// One CSV line matching [`SimResult::CSV_HEADER`]; absent estimates
    /// leave empty fields. Floats use the shortest round-trip form.
    pub fn csv_row(&self) -> String {
        let est = |e: &Option<Estimate>| match e {
            Some(e) => format!("{},{}", e.mean, e.std_error),
            None => ",".to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.replications,
            est(&self.mean_sojourn_premium),
            est(&self.mean_sojourn_ordinary),
            est(&self.mean_revenue_per_customer),
            self.counts.premium,
            self.counts.ordinary,
            self.arrivals,
            self.departures,
            self.in_system
        )
    }
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of replication `rep` derived from the base seed.
pub fn replication_seed(seed: u64, rep: usize) -> u64 {
    if rep == 0 {
        seed
    } else {
        splitmix64(seed ^ splitmix64(rep as u64))
    }
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn exponential(&mut self, rate: f64) -> f64 {
        -(-self.uniform()).ln_1p() / rate
    }
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    let var = if xs.len() > 1 {
        m2 / (xs.len() - 1) as f64
    } else {
        0.0
    };
    (mean, var)
}

/// Mean with an iid standard error.
fn iid_estimate(xs: &[f64]) -> Option<Estimate> {
    if xs.is_empty() {
        return None;
    }
    let (mean, var) = mean_and_var(xs);
    Some(Estimate {
        mean,
        std_error: (var / xs.len() as f64).sqrt(),
    })
}

/// Batch means over `BATCHES` contiguous batches (fewer when there are
/// fewer observations). The point estimate is the plain sample mean.
fn batch_means(xs: &[f64]) -> Option<Estimate> {
    if xs.is_empty() {
        return None;
    }
    let k = BATCHES.min(xs.len());
    let size = xs.len() / k;
    let means: Vec<f64> = (0..k)
        .map(|b| {
            let end = if b + 1 == k { xs.len() } else { (b + 1) * size };
            mean_and_var(&xs[b * size..end]).0
        })
        .collect();
    let (_, var) = mean_and_var(&means);
    Some(Estimate {
        mean: mean_and_var(xs).0,
        std_error: (var / k as f64).sqrt(),
    })
}

/// Combines per-replication estimates: mean of means, and the spread of
/// the replication means as standard error when there are at least two.
fn combine(parts: &[Option<Estimate>]) -> Option<Estimate> {
    let present: Vec<Estimate> = parts.iter().flatten().copied().collect();
    match present.len() {
        0 => None,
        1 => Some(present[0]),
        r => {
            let means: Vec<f64> = present.iter().map(|e| e.mean).collect();
            let (mean, var) = mean_and_var(&means);
            Some(Estimate {
                mean,
                std_error: (var / r as f64).sqrt(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Queue simulation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Job {
    id: usize,
    arrival: f64,
    remaining: f64,
    premium: bool,
}

/// Who buys priority at a given offered price.
#[derive(Debug, Clone, Copy)]
enum Buyer {
    Probability(f64),
    UpTo(f64),
}

fn buyer_rule(params: &QueueParams, mechanism: &PriceMechanism) -> Result<Buyer> {
    let report = match *mechanism {
        PriceMechanism::Flat { tau } => game::flat_price_equilibria(params, tau)?,
        PriceMechanism::HeteroSchedule { .. } => return Ok(Buyer::UpTo(f64::INFINITY)),
        ref m => {
            let dist = m.price_distribution().ok_or_else(|| {
                Error::InvalidConfig(format!("`{}` cannot drive class assignment", m.name()))
            })?;
            game::mechanism_equilibria(params, dist.as_ref(), DEFAULT_GRID)?
        }
    };
    let worst = report
        .equilibria
        .iter()
        .min_by(|a, b| a.revenue.total_cmp(&b.revenue))
        .ok_or_else(|| Error::InvalidConfig("mechanism has no equilibrium".into()))?;
    Ok(match worst.profile {
        StrategyProfile::AllPay => Buyer::UpTo(f64::INFINITY),
        StrategyProfile::NonePay => Buyer::UpTo(f64::NEG_INFINITY),
        StrategyProfile::Threshold { p_cut } => Buyer::UpTo(p_cut),
        StrategyProfile::Mixed { q } => Buyer::Probability(q.value()),
    })
}

struct Replication {
    premium: Vec<f64>,
    ordinary: Vec<f64>,
    payments: Vec<f64>,
    charged: bool,
    arrivals: u64,
    departures: u64,
    in_system: u64,
}

fn run_replication(cfg: &SimConfig, buyer: Option<Buyer>, seed: u64) -> Result<Replication> {
    let params = cfg.params;
    let mut arrivals_rng = Stream::new(seed, STREAM_ARRIVALS);
    let mut services_rng = Stream::new(seed, STREAM_SERVICES);
    let mut classes_rng = Stream::new(seed, STREAM_CLASSES);
    let mut prices_rng = Stream::new(seed, STREAM_PRICES);

    let observed = cfg.num_customers - cfg.warmup_customers;
    let mut sojourn = vec![0.0; observed];
    let mut is_premium = vec![false; observed];
    let mut payments = Vec::new();
    let charged = matches!(cfg.assignment, Assignment::Mechanism { .. });

    let mut premium_q: VecDeque<Job> = VecDeque::new();
    let mut ordinary_q: VecDeque<Job> = VecDeque::new();
    let mut now = 0.0;
    let mut next_arrival = arrivals_rng.exponential(params.lambda());
    let mut arrivals = 0u64;
    let mut departures = 0u64;
    let mut tracked_in_system = 0usize;

    while (arrivals as usize) < cfg.num_customers || tracked_in_system > 0 {
        let completion = premium_q
            .front()
            .or_else(|| ordinary_q.front())
            .map_or(f64::INFINITY, |j| now + j.remaining);

        // Completion wins ties.
        if completion <= next_arrival {
            now = completion;
            let job = if premium_q.is_empty() {
                ordinary_q.pop_front()
            } else {
                premium_q.pop_front()
            }
            .expect("a job is in service");
            departures += 1;
            if job.id < cfg.num_customers {
                tracked_in_system -= 1;
                if job.id >= cfg.warmup_customers {
                    sojourn[job.id - cfg.warmup_customers] = now - job.arrival;
                }
            }
            continue;
        }

        let elapsed = next_arrival - now;
        if let Some(head) = premium_q.front_mut().or(ordinary_q.front_mut()) {
            head.remaining = (head.remaining - elapsed).max(0.0);
        }
        now = next_arrival;
        next_arrival = now + arrivals_rng.exponential(params.lambda());

        let id = arrivals as usize;
        arrivals += 1;
        let work = services_rng.exponential(params.mu());
        let class_u = classes_rng.uniform();
        let premium = match (&cfg.assignment, buyer) {
            (Assignment::Fraction { q }, _) => class_u < q.value(),
            (Assignment::Mechanism { mechanism }, Some(rule)) => {
                let price_u = prices_rng.uniform();
                let (price, buys) = match *mechanism {
                    PriceMechanism::HeteroSchedule { cost_dist, .. } => {
                        let c = cost_dist.sample(price_u)?;
                        (hetero_price(&params, &cost_dist, c), true)
                    }
                    ref m => {
                        let price = sample_price(m, PriceIndex::Uniform(price_u))?;
                        let buys = match rule {
                            Buyer::UpTo(cut) => price <= cut,
                            Buyer::Probability(p) => class_u < p,
                        };
                        (price, buys)
                    }
                };
                if id >= cfg.warmup_customers && id < cfg.num_customers {
                    payments.push(if buys { price } else { 0.0 });
                }
                buys
            }
            (Assignment::Mechanism { .. }, None) => unreachable!("buyer rule resolved upfront"),
        };
        if id < cfg.num_customers {
            tracked_in_system += 1;
            if id >= cfg.warmup_customers {
                is_premium[id - cfg.warmup_customers] = premium;
            }
        }
        let job = Job {
            id,
            arrival: now,
            remaining: work,
            premium,
        };
        if job.premium {
            premium_q.push_back(job);
        } else {
            ordinary_q.push_back(job);
        }
    }

    let (premium, ordinary): (Vec<_>, Vec<_>) =
        sojourn.iter().zip(&is_premium).partition(|(_, &p)| p);
    Ok(Replication {
        premium: premium.into_iter().map(|(&s, _)| s).collect(),
        ordinary: ordinary.into_iter().map(|(&s, _)| s).collect(),
        payments,
        charged,
        arrivals,
        departures,
        in_system: (premium_q.len() + ordinary_q.len()) as u64,
    })
}

/// Simulates the queue; bit-for-bit deterministic given the config.
pub fn simulate_priority_queue(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let buyer = match cfg.assignment {
        Assignment::Mechanism { ref mechanism } => Some(buyer_rule(&cfg.params, mechanism)?),
        Assignment::Fraction { .. } => None,
    };
    let reps: Vec<Replication> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(cfg, buyer, replication_seed(cfg.seed, r)))
        .collect::<Result<_>>()?;

    let mut out = SimResult::empty(cfg.seed, cfg.replications);
    let per = |f: &dyn Fn(&Replication) -> Option<Estimate>| -> Vec<Option<Estimate>> {
        reps.iter().map(f).collect()
    };
    out.mean_sojourn_premium = combine(&per(&|r| batch_means(&r.premium)));
    out.mean_sojourn_ordinary = combine(&per(&|r| batch_means(&r.ordinary)));
    out.mean_revenue_per_customer = combine(&per(&|r| {
        if r.charged {
            batch_means(&r.payments)
        } else {
            None
        }
    }));
    for r in &reps {
        out.counts.premium += r.premium.len();
        out.counts.ordinary += r.ordinary.len();
        out.arrivals += r.arrivals;
        out.departures += r.departures;
        out.in_system += r.in_system;
    }
    Ok(out)
}

fn check_count(num_customers: usize) -> Result<()> {
    if num_customers == 0 {
        Err(Error::InvalidConfig("need at least one customer".into()))
    } else {
        Ok(())
    }
}

/// Mean payment when every customer pays a price drawn from a
/// price-indexed mechanism.
pub fn simulate_revenue(
    params: &QueueParams,
    mechanism: &PriceMechanism,
    num_customers: usize,
    seed: u64,
) -> Result<SimResult> {
    check_count(num_customers)?;
    if !matches!(
        mechanism,
        PriceMechanism::Flat { .. }
            | PriceMechanism::RandomOptimal { .. }
            | PriceMechanism::DiscreteOptimal { .. }
    ) {
        return Err(Error::InvalidConfig(format!(
            "`{}` is not a price-indexed mechanism",
            mechanism.name()
        )));
    }
    let _ = params;
    let mut rng = Stream::new(seed, STREAM_PRICES);
    let prices = (0..num_customers)
        .map(|_| sample_price(mechanism, PriceIndex::Uniform(rng.uniform())))
        .collect::<Result<Vec<_>>>()?;
    let mut out = SimResult::empty(seed, 1);
    out.mean_revenue_per_customer = iid_estimate(&prices);
    Ok(out)
}

/// Mean payment under the cost-indexed schedule with costs drawn from
/// `cost_dist`.
pub fn simulate_hetero_revenue(
    params: &QueueParams,
    cost_dist: &CostDistribution,
    num_customers: usize,
    seed: u64,
) -> Result<SimResult> {
    check_count(num_customers)?;
    let mut rng = Stream::new(seed, STREAM_PRICES);
    let prices = (0..num_customers)
        .map(|_| {
            Ok(hetero_price(
                params,
                cost_dist,
                cost_dist.sample(rng.uniform())?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SimResult::empty(seed, 1);
    out.mean_revenue_per_customer = iid_estimate(&prices);
    Ok(out)
}
