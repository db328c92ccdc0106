//! The customer game induced by a pricing mechanism.
//!
//! Every customer decides whether to buy priority at the price offered to
//! them. Buying is worth `f(q)` where `q` is the fraction of the population
//! that buys. Indifferent customers buy.
//!
//! Random mechanisms are analyzed on a grid of price levels taken uniformly
//! in probability space. Each customer is charged the grid level at or just
//! below their drawn price, i.e. everyone is asked a little less than their
//! draw; the continuous fixed-point condition then becomes a strict
//! preference at every level.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanisms::{PriceDistribution, PricePoint};
use crate::model::{PremiumFraction, QueueParams};

/// Absolute tolerance (time units) within which a customer is indifferent.
pub const INDIFFERENCE_TOL: f64 = 1e-9;
/// One-sided perturbation of the premium fraction used to classify stability.
pub const STABILITY_DELTA: f64 = 1e-4;
/// Default number of grid points for random-mechanism audits.
pub const DEFAULT_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Pay,
    NotPay,
    Indifferent,
}

impl Action {
    /// Indifference is resolved in favour of buying.
    pub fn buys(self) -> bool {
        !matches!(self, Action::NotPay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum StrategyProfile {
    AllPay,
    NonePay,
    Mixed {
        q: PremiumFraction,
    },
    /// Pay iff the offered price is at most `p_cut`.
    Threshold {
        p_cut: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub profile: StrategyProfile,
    pub stability: Stability,
    /// Expected payment per customer under this profile.
    pub revenue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub equilibria: Vec<Equilibrium>,
    pub unique: bool,
    pub revenue_worst_case: f64,
}

impl EquilibriumReport {
    fn from_equilibria(equilibria: Vec<Equilibrium>) -> Self {
        let revenue_worst_case = equilibria
            .iter()
            .map(|e| e.revenue)
            .fold(f64::INFINITY, f64::min);
        Self {
            unique: equilibria.len() == 1,
            revenue_worst_case: if equilibria.is_empty() {
                0.0
            } else {
                revenue_worst_case
            },
            equilibria,
        }
    }

    pub fn len(&self) -> usize {
        self.equilibria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equilibria.is_empty()
    }
}

/// Best response to price `tau` when a fraction `q` of others buys.
pub fn best_response(params: &QueueParams, tau: f64, q: PremiumFraction) -> Action {
    let value = params.priority_value(q);
    if tau < value - INDIFFERENCE_TOL {
        Action::Pay
    } else if tau > value + INDIFFERENCE_TOL {
        Action::NotPay
    } else {
        Action::Indifferent
    }
}

/// The fraction `q_e` with `f(q_e) = tau`, for `f(0) < tau < f(1)`.
pub fn indifference_fraction(params: &QueueParams, tau: f64) -> Result<PremiumFraction> {
    let (lo, hi) = params.value_bounds();
    if !(tau > lo && tau < hi) {
        return Err(Error::InvalidArgument(format!(
            "price {tau} is outside the open interval ({lo}, {hi})"
        )));
    }
    let q = (1.0 - lo / tau) / params.rho();
    Ok(PremiumFraction::clamped(q))
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "price must be finite and non-negative, got {tau}"
        )))
    }
}

fn profile_fraction(profile: &StrategyProfile) -> Result<f64> {
    match *profile {
        StrategyProfile::AllPay => Ok(1.0),
        StrategyProfile::NonePay => Ok(0.0),
        StrategyProfile::Mixed { q } => Ok(q.value()),
        StrategyProfile::Threshold { .. } => Err(Error::InvalidArgument(
            "threshold profiles do not apply to a flat price".into(),
        )),
    }
}

fn is_flat_equilibrium(params: &QueueParams, tau: f64, profile: &StrategyProfile) -> Result<bool> {
    let q = profile_fraction(profile)?;
    let action = best_response(params, tau, PremiumFraction::clamped(q));
    Ok(match profile {
        StrategyProfile::AllPay => action.buys(),
        StrategyProfile::NonePay => action == Action::NotPay,
        _ => action == Action::Indifferent,
    })
}

/// Stability of a flat-price equilibrium, by re-evaluating the best
/// response after shifting the premium fraction by `STABILITY_DELTA` to
/// each feasible side. Stable iff every shift is pushed back.
pub fn classify_stability(
    params: &QueueParams,
    tau: f64,
    profile: &StrategyProfile,
) -> Result<Stability> {
    check_tau(tau)?;
    if !is_flat_equilibrium(params, tau, profile)? {
        return Err(Error::NotAnEquilibrium(format!(
            "{profile:?} at price {tau}"
        )));
    }
    let q = profile_fraction(profile)?;
    // Keep the shift inside the basin: at most half way to the nearest other
    // equilibrium fraction.
    let (lo, hi) = params.value_bounds();
    let mut delta = STABILITY_DELTA;
    if tau > lo && tau < hi {
        let qe = indifference_fraction(params, tau)?.value();
        for other in [0.0, qe, 1.0] {
            let gap = (other - q).abs();
            if gap > 0.0 {
                delta = delta.min(0.5 * gap);
            }
        }
    }
    let mut restoring = true;
    if q < 1.0 {
        let up = best_response(params, tau, PremiumFraction::clamped(q + delta));
        restoring &= !up.buys();
    }
    if q > 0.0 {
        let down = best_response(params, tau, PremiumFraction::clamped(q - delta));
        restoring &= down.buys();
    }
    Ok(if restoring {
        Stability::Stable
    } else {
        Stability::Unstable
    })
}

/// Equilibria of the flat-price game.
///
/// `tau <= f(0)`: buying is dominant. `tau >= f(1)`: not buying is dominant.
/// In between: all buy, none buy, and the mixed profile at `q_e`.
pub fn flat_price_equilibria(params: &QueueParams, tau: f64) -> Result<EquilibriumReport> {
    check_tau(tau)?;
    let (lo, hi) = params.value_bounds();
    let profiles = if tau <= lo + INDIFFERENCE_TOL {
        vec![StrategyProfile::AllPay]
    } else if tau >= hi - INDIFFERENCE_TOL {
        vec![StrategyProfile::NonePay]
    } else {
        vec![
            StrategyProfile::AllPay,
            StrategyProfile::NonePay,
            StrategyProfile::Mixed {
                q: indifference_fraction(params, tau)?,
            },
        ]
    };
    let equilibria = profiles
        .into_iter()
        .map(|profile| {
            Ok(Equilibrium {
                stability: classify_stability(params, tau, &profile)?,
                revenue: tau * profile_fraction(&profile)?,
                profile,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumReport::from_equilibria(equilibria))
}

// ---------------------------------------------------------------------------
// Random mechanisms
// ---------------------------------------------------------------------------

fn probability_grid(grid_size: usize) -> Result<Vec<f64>> {
    match grid_size {
        0 => Err(Error::InvalidArgument(
            "grid size must be at least 1".into(),
        )),
        1 => Ok(vec![0.0]),
        n => Ok((0..n).map(|k| k as f64 / (n - 1) as f64).collect()),
    }
}

fn check_support(dist: &dyn PriceDistribution) -> Result<(f64, f64)> {
    let (lo, hi) = dist.support();
    if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0) {
        return Err(Error::InvalidCdf(format!(
            "support [{lo}, {hi}] must be finite, ordered and non-negative"
        )));
    }
    Ok((lo, hi))
}

fn check_monotone(prices: &[f64], cdf: &[f64]) -> Result<()> {
    for (k, w) in cdf.windows(2).enumerate() {
        if prices[k + 1] < prices[k] || w[1] < w[0] - 1e-14 {
            return Err(Error::InvalidCdf(format!(
                "not monotone near price {}",
                prices[k + 1]
            )));
        }
    }
    if cdf.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::InvalidCdf("values outside [0, 1]".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessAudit {
    /// No grid price violates the all-pay condition.
    pub holds: bool,
    /// Grid prices at which a customer prefers not to pay even when every
    /// cheaper offer is accepted.
    pub counterexamples: Vec<StrategyProfile>,
    /// `max |f(P(price < p)) - p|` over the grid.
    pub max_equality_residual: f64,
    /// `min (f(P(price < p)) - p)` over the grid.
    pub min_slack: f64,
    pub grid_points: usize,
}

/// Checks that, at every grid price `p`, a customer offered `p` prefers to
/// pay once everyone offered less pays and nobody offered more does:
/// `f(P(price < p)) >= p`. Grid points are uniform in probability space.
pub fn verify_unique_all_pay(
    params: &QueueParams,
    dist: &dyn PriceDistribution,
    grid_size: usize,
) -> Result<UniquenessAudit> {
    check_support(dist)?;
    let prices: Vec<f64> = probability_grid(grid_size)?
        .par_iter()
        .map(|&u| dist.quantile(u))
        .collect();
    let cdf: Vec<f64> = prices.par_iter().map(|&p| dist.cdf(p)).collect();
    check_monotone(&prices, &cdf)?;
    let slacks: Vec<f64> = prices
        .par_iter()
        .map(|&p| params.value_at(dist.cdf_left(p).clamp(0.0, 1.0)) - p)
        .collect();
    let counterexamples = prices
        .iter()
        .zip(&slacks)
        .filter(|(_, &s)| s < -INDIFFERENCE_TOL)
        .map(|(&p, _)| StrategyProfile::Threshold { p_cut: p })
        .collect::<Vec<_>>();
    Ok(UniquenessAudit {
        holds: counterexamples.is_empty(),
        counterexamples,
        max_equality_residual: slacks.iter().map(|s| s.abs()).fold(0.0, f64::max),
        min_slack: slacks.iter().copied().fold(f64::INFINITY, f64::min),
        grid_points: prices.len(),
    })
}

/// Price levels with their accumulated probability, as seen by the game.
struct LevelGame {
    levels: Vec<f64>,
    // through[k]: fraction paying when levels 0..=k pay.
    through: Vec<f64>,
}

impl LevelGame {
    fn build(dist: &dyn PriceDistribution, grid_size: usize) -> Result<Self> {
        check_support(dist)?;
        let mut levels = match dist.atoms() {
            Some(a) => a,
            None => probability_grid(grid_size)?
                .par_iter()
                .map(|&u| dist.quantile(u))
                .collect(),
        };
        let cdf: Vec<f64> = levels.iter().map(|&p| dist.cdf(p)).collect();
        check_monotone(&levels, &cdf)?;
        levels.dedup();
        let m = levels.len();
        let through = (0..m)
            .map(|k| {
                if k + 1 < m {
                    dist.cdf_left(levels[k + 1]).clamp(0.0, 1.0)
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { levels, through })
    }

    fn fraction(&self, k: Option<usize>) -> f64 {
        k.map_or(0.0, |k| self.through[k])
    }

    fn mass(&self, k: usize) -> f64 {
        self.through[k] - if k == 0 { 0.0 } else { self.through[k - 1] }
    }

    /// Paying fraction after one round of best responses to fraction `q`.
    fn respond(&self, params: &QueueParams, q: f64) -> f64 {
        let value = params.value_at(q.clamp(0.0, 1.0));
        let k = self
            .levels
            .partition_point(|&p| p <= value + INDIFFERENCE_TOL);
        if k == 0 {
            0.0
        } else {
            self.through[k - 1]
        }
    }

    /// Whether best-response dynamics started from `q` return to `target`.
    fn returns_to(&self, params: &QueueParams, mut q: f64, target: f64) -> bool {
        for _ in 0..self.levels.len() + 3 {
            let next = self.respond(params, q);
            if (next - q).abs() <= 1e-15 {
                break;
            }
            q = next;
        }
        (q - target).abs() <= 1e-12
    }

    fn stability(&self, params: &QueueParams, q: f64) -> Stability {
        let mut stable = true;
        if q < 1.0 {
            stable &= self.returns_to(params, (q + STABILITY_DELTA).min(1.0), q);
        }
        if q > 0.0 {
            stable &= self.returns_to(params, (q - STABILITY_DELTA).max(0.0), q);
        }
        if stable {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdEquilibrium {
    pub profile: StrategyProfile,
    pub paying_fraction: f64,
    /// Smallest margin by which the best-response conditions hold. Values
    /// near zero mark equilibria that rest on exact indifference.
    pub slack: f64,
    pub revenue: f64,
    pub stability: Stability,
}

/// Threshold profiles (pay iff offered at most `p_cut`) that are equilibria:
/// everyone at or below the cut weakly prefers paying given the induced
/// premium fraction, and everyone above strictly prefers not to.
pub fn find_threshold_equilibria(
    params: &QueueParams,
    dist: &dyn PriceDistribution,
    grid_size: usize,
) -> Result<Vec<ThresholdEquilibrium>> {
    let game = LevelGame::build(dist, grid_size)?;
    let m = game.levels.len();
    // first positive-mass level strictly above k
    let mut next_positive = vec![None; m + 1];
    for k in (0..m).rev() {
        next_positive[k] = if game.mass(k) > 1e-14 {
            Some(k)
        } else {
            next_positive[k + 1]
        };
    }

    let mut out = Vec::new();
    let mut revenue = 0.0;
    for cut in std::iter::once(None).chain((0..m).map(Some)) {
        if let Some(k) = cut {
            let mass = game.mass(k);
            revenue += mass * game.levels[k];
            if mass <= 1e-14 {
                continue;
            }
        }
        let q = game.fraction(cut);
        let value = params.value_at(q);
        let pay_slack = cut.map_or(f64::INFINITY, |k| value - game.levels[k]);
        let above = next_positive[cut.map_or(0, |k| k + 1)];
        let stay_slack = above.map_or(f64::INFINITY, |j| game.levels[j] - value);
        if pay_slack < -INDIFFERENCE_TOL || stay_slack <= INDIFFERENCE_TOL {
            continue;
        }
        let profile = match (cut, above) {
            (None, _) => StrategyProfile::NonePay,
            (Some(_), None) => StrategyProfile::AllPay,
            (Some(k), Some(_)) => StrategyProfile::Threshold {
                p_cut: game.levels[k],
            },
        };
        out.push(ThresholdEquilibrium {
            profile,
            paying_fraction: q,
            slack: pay_slack.min(stay_slack),
            revenue,
            stability: game.stability(params, q),
        });
    }
    Ok(out)
}

/// Equilibrium report of a random price mechanism over threshold profiles.
pub fn mechanism_equilibria(
    params: &QueueParams,
    dist: &dyn PriceDistribution,
    grid_size: usize,
) -> Result<EquilibriumReport> {
    let eqs = find_threshold_equilibria(params, dist, grid_size)?
        .into_iter()
        .map(|t| Equilibrium {
            profile: t.profile,
            stability: t.stability,
            revenue: t.revenue,
        })
        .collect();
    Ok(EquilibriumReport::from_equilibria(eqs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    /// Not paying was eliminated in the given (1-based) round.
    Pay {
        round: usize,
    },
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliminationOutcome {
    /// One entry per input grid point, in input order.
    pub choices: Vec<Choice>,
    pub rounds: usize,
}

impl EliminationOutcome {
    pub fn all_pay(&self) -> bool {
        self.choices.iter().all(|c| matches!(c, Choice::Pay { .. }))
    }
}

/// Iterated elimination of weakly dominated strategies on a discrete price
/// grid. Each round, not paying is eliminated at every undecided price that
/// is still worth paying when only the already-decided customers buy.
pub fn iterated_elimination(params: &QueueParams, grid: &[PricePoint]) -> EliminationOutcome {
    let mut choices = vec![Choice::Undetermined; grid.len()];
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].price.total_cmp(&grid[b].price));
    let mut paying: f64 = 0.0;
    let mut rounds = 0;
    loop {
        let value = params.value_at(paying.clamp(0.0, 1.0));
        let fixed: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| {
                choices[i] == Choice::Undetermined && grid[i].price <= value + INDIFFERENCE_TOL
            })
            .collect();
        if fixed.is_empty() {
            break;
        }
        rounds += 1;
        for i in fixed {
            choices[i] = Choice::Pay { round: rounds };
            paying += grid[i].probability;
        }
    }
    EliminationOutcome { choices, rounds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::random_price_cdf;
    use crate::mechanisms::{
        discrete_grid, CustomCdf, DiscretePrice, OptimalRandomPrice, PointMass,
    };
    use approx::assert_abs_diff_eq;

    fn half() -> QueueParams {
        QueueParams::new(0.5, 1.0).unwrap()
    }

    fn q(x: f64) -> PremiumFraction {
        PremiumFraction::new(x).unwrap()
    }

    #[test]
    fn best_response_examples() {
        let p = half();
        assert_eq!(best_response(&p, 0.5, q(0.0)), Action::Pay);
        assert_eq!(best_response(&p, 3.0, q(1.0)), Action::NotPay);
        let r = best_response(&p, 1.5, q(2.0 / 3.0));
        assert_eq!(r, Action::Indifferent);
        assert!(r.buys());
    }

    #[test]
    fn indifference_fraction_examples() {
        let p = half();
        let qe = indifference_fraction(&p, 1.5).unwrap();
        assert_abs_diff_eq!(qe.value(), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.priority_value(qe), 1.5, epsilon = 1e-10);
        assert!(indifference_fraction(&p, 1.0 + 1e-9).unwrap().value() < 1e-8);
        assert!(indifference_fraction(&p, 2.0 - 1e-9).unwrap().value() > 1.0 - 1e-8);
        assert!(indifference_fraction(&p, 1.0).is_err());
        assert!(indifference_fraction(&p, 2.0).is_err());
        assert!(indifference_fraction(&p, 0.2).is_err());
    }

    #[test]
    fn indifference_matches_bisection() {
        let p = QueueParams::new(0.8, 1.3).unwrap();
        let (lo, hi) = p.value_bounds();
        for k in 1..20 {
            let tau = lo + (hi - lo) * k as f64 / 20.0;
            let (mut a, mut b) = (0.0, 1.0);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if p.priority_value(q(m)) < tau {
                    a = m;
                } else {
                    b = m;
                }
            }
            assert_abs_diff_eq!(
                indifference_fraction(&p, tau).unwrap().value(),
                a,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn flat_examples() {
        let p = half();
        let r = flat_price_equilibria(&p, 1.0).unwrap();
        assert!(r.unique);
        assert_eq!(r.equilibria[0].profile, StrategyProfile::AllPay);
        assert_eq!(r.revenue_worst_case, 1.0);

        let r = flat_price_equilibria(&p, 1.5).unwrap();
        assert_eq!(r.len(), 3);
        assert!(!r.unique);
        assert_eq!(r.revenue_worst_case, 0.0);

        let r = flat_price_equilibria(&p, 2.5).unwrap();
        assert!(r.unique);
        assert_eq!(r.equilibria[0].profile, StrategyProfile::NonePay);
        assert_eq!(r.revenue_worst_case, 0.0);

        let r = flat_price_equilibria(&p, 0.9).unwrap();
        assert!(r.unique);
        assert_eq!(r.revenue_worst_case, 0.9);
        assert!(flat_price_equilibria(&p, -1.0).is_err());
    }

    #[test]
    fn stability_examples() {
        let p = half();
        let mixed = StrategyProfile::Mixed { q: q(2.0 / 3.0) };
        assert_eq!(
            classify_stability(&p, 1.5, &mixed).unwrap(),
            Stability::Unstable
        );
        assert_eq!(
            classify_stability(&p, 1.5, &StrategyProfile::AllPay).unwrap(),
            Stability::Stable
        );
        assert_eq!(
            classify_stability(&p, 1.5, &StrategyProfile::NonePay).unwrap(),
            Stability::Stable
        );
        assert!(matches!(
            classify_stability(&p, 0.5, &StrategyProfile::NonePay),
            Err(Error::NotAnEquilibrium(_))
        ));
        assert!(classify_stability(&p, 1.5, &StrategyProfile::Mixed { q: q(0.2) }).is_err());
        assert!(classify_stability(&p, 1.5, &StrategyProfile::Threshold { p_cut: 1.2 }).is_err());
    }

    #[test]
    fn indifference_fraction_increases_with_price() {
        let p = QueueParams::new(0.4, 2.0).unwrap();
        let (lo, hi) = p.value_bounds();
        let mut prev = -1.0;
        for k in 1..100 {
            let v = indifference_fraction(&p, lo + (hi - lo) * k as f64 / 100.0)
                .unwrap()
                .value();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn audit_optimal_random_price() {
        let p = half();
        let audit = verify_unique_all_pay(&p, &OptimalRandomPrice::new(p), 10_000).unwrap();
        assert!(audit.holds);
        assert!(audit.max_equality_residual <= 1e-10);
        assert_eq!(audit.grid_points, 10_000);
    }

    #[test]
    fn audit_price_raised_distribution_fails() {
        let p = half();
        let (lo, hi) = p.value_bounds();
        let g = CustomCdf::new(|x| random_price_cdf(&p, x - 0.05), lo + 0.05, hi + 0.05).unwrap();
        let audit = verify_unique_all_pay(&p, &g, 10_000).unwrap();
        assert!(!audit.holds);
        assert!(!audit.counterexamples.is_empty());
    }

    #[test]
    fn audit_cheaper_distribution_passes() {
        let p = half();
        let (lo, hi) = p.value_bounds();
        // Compress the support toward f(0): G(p) = F(f0 + 2 (p - f0)) >= F(p).
        let g = CustomCdf::new(
            |x| random_price_cdf(&p, lo + 2.0 * (x - lo)),
            lo,
            lo + 0.5 * (hi - lo),
        )
        .unwrap();
        let audit = verify_unique_all_pay(&p, &g, 10_000).unwrap();
        assert!(audit.holds);
        assert!(audit.min_slack >= 0.0);
    }

    #[test]
    fn audit_rejects_bad_cdf() {
        let p = half();
        let g = CustomCdf::new(|x| if x < 1.5 { 0.9 } else { 0.1 }, 1.0, 2.0).unwrap();
        assert!(matches!(
            verify_unique_all_pay(&p, &g, 100),
            Err(Error::InvalidCdf(_))
        ));
        assert!(verify_unique_all_pay(&p, &OptimalRandomPrice::new(p), 0).is_err());
    }

    #[test]
    fn thresholds_of_optimal_price() {
        let p = half();
        let eqs = find_threshold_equilibria(&p, &OptimalRandomPrice::new(p), 10_000).unwrap();
        assert_eq!(eqs.len(), 1, "{eqs:?}");
        assert_eq!(eqs[0].profile, StrategyProfile::AllPay);
        assert_eq!(eqs[0].paying_fraction, 1.0);
        assert_eq!(eqs[0].stability, Stability::Stable);
    }

    #[test]
    fn thresholds_of_point_mass_match_flat_game() {
        let p = half();
        let eqs = find_threshold_equilibria(&p, &PointMass::new(1.5), 100).unwrap();
        let profiles: Vec<_> = eqs.iter().map(|e| e.profile).collect();
        assert_eq!(
            profiles,
            vec![StrategyProfile::NonePay, StrategyProfile::AllPay]
        );
        assert!(eqs.iter().all(|e| e.stability == Stability::Stable));
        let eqs = find_threshold_equilibria(&p, &PointMass::new(1.0), 100).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].profile, StrategyProfile::AllPay);
        assert_eq!(eqs[0].revenue, 1.0);
    }

    #[test]
    fn thresholds_of_raised_tail() {
        let p = half();
        let (lo, hi) = p.value_bounds();
        let (cut, shift) = (1.3, 0.05);
        let g = CustomCdf::new(
            move |x| {
                if x < cut {
                    random_price_cdf(&p, x)
                } else if x < cut + shift {
                    random_price_cdf(&p, cut)
                } else {
                    random_price_cdf(&p, x - shift)
                }
            },
            lo,
            hi + shift,
        )
        .unwrap();
        let eqs = find_threshold_equilibria(&p, &g, 10_000).unwrap();
        let interior: Vec<f64> = eqs
            .iter()
            .filter_map(|e| match e.profile {
                StrategyProfile::Threshold { p_cut } => Some(p_cut),
                _ => None,
            })
            .collect();
        assert!(!interior.is_empty(), "{eqs:?}");
        assert!(interior.iter().all(|&c| c < hi + shift));
        assert!(interior.iter().any(|&c| (c - cut).abs() < 1e-3));
        assert!(!verify_unique_all_pay(&p, &g, 10_000).unwrap().holds);
    }

    #[test]
    fn discrete_grid_audit_and_thresholds() {
        let p = QueueParams::new(0.7, 1.0).unwrap();
        let grid = discrete_grid(&p, 25).unwrap();
        let d = DiscretePrice::new(grid.clone()).unwrap();
        assert!(verify_unique_all_pay(&p, &d, 1000).unwrap().holds);
        let eqs = find_threshold_equilibria(&p, &d, 1000).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].profile, StrategyProfile::AllPay);
        assert_abs_diff_eq!(
            eqs[0].revenue,
            crate::mechanisms::discrete_mean(&p, 25).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn elimination_examples() {
        let p = half();
        let out = iterated_elimination(&p, &discrete_grid(&p, 1).unwrap());
        assert_eq!(out.choices, vec![Choice::Pay { round: 1 }]);

        let grid = discrete_grid(&p, 10).unwrap();
        let out = iterated_elimination(&p, &grid);
        assert!(out.all_pay());
        assert_eq!(out.rounds, 10);

        let mut inflated = grid.clone();
        inflated[1].price += 0.1;
        let out = iterated_elimination(&p, &inflated);
        assert_eq!(out.rounds, 1);
        assert!(!out.all_pay());
        assert_eq!(out.choices[0], Choice::Pay { round: 1 });
        assert_eq!(out.choices[1], Choice::Undetermined);
        assert!(
            !verify_unique_all_pay(&p, &DiscretePrice::new(inflated).unwrap(), 100)
                .unwrap()
                .holds
        );
    }

    #[test]
    fn elimination_agrees_with_audit() {
        for n in [1, 2, 5, 30, 200] {
            for rho in [0.2, 0.5, 0.85] {
                let p = QueueParams::new(rho, 1.0).unwrap();
                let grid = discrete_grid(&p, n).unwrap();
                let audit =
                    verify_unique_all_pay(&p, &DiscretePrice::new(grid.clone()).unwrap(), 500)
                        .unwrap();
                assert_eq!(iterated_elimination(&p, &grid).all_pay(), audit.holds);
                assert!(audit.holds);
            }
        }
    }
}
