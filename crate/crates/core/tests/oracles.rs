//! Cross-checks of the analytic routines against independent oracles.

mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use prioq::cost::CostDistribution;
use prioq::game;
use prioq::mechanisms::{self, DiscretePrice, PriceDistribution, PriceIndex, PriceMechanism};
use prioq::model::{PremiumFraction, QueueParams};

use common::*;

fn params(lambda: f64, mu: f64) -> QueueParams {
    QueueParams::new(lambda, mu).unwrap()
}

#[test]
fn waits_match_hand_values() {
    let p = params(0.7, 1.0);
    let q = PremiumFraction::new(0.3).unwrap();
    assert_abs_diff_eq!(p.mean_wait_premium(q), 1.0 / 0.79, epsilon = 1e-14);
    assert_abs_diff_eq!(p.mean_wait_ordinary(q), 1.0 / (0.3 * 0.79), epsilon = 1e-14);
    assert_abs_diff_eq!(
        p.priority_value(q),
        value_of_priority(0.7, 1.0, 0.3),
        epsilon = 1e-14
    );
}

#[test]
fn random_price_cdf_matches_fixed_point_inversion() {
    for &(lambda, mu) in &[(0.5, 1.0), (0.2, 0.5), (2.7, 3.0)] {
        let p = params(lambda, mu);
        let (lo, hi) = p.value_bounds();
        for i in 0..=200 {
            let x = lo + (hi - lo) * i as f64 / 200.0;
            let oracle = optimal_cdf_by_fixed_point(lambda, mu, x);
            assert_abs_diff_eq!(mechanisms::random_price_cdf(&p, x), oracle, epsilon = 1e-12);
        }
    }
}

#[test]
fn random_price_mean_by_two_quadratures() {
    for rho in [0.1, 0.5, 0.9] {
        let p = params(rho, 1.0);
        let (lo, hi) = p.value_bounds();
        let cdf = |x: f64| mechanisms::random_price_cdf(&p, x);
        let by_tail = mean_from_cdf(cdf, lo, hi, 1e-13);
        // E[P] = ∫ p dF with density 1 / (mu (1 - rho) p^2)
        let by_density = simpson(|x| x / ((1.0 - rho) * x * x), lo, hi, 20_000);
        let m = mechanisms::random_price_mean(&p);
        assert_abs_diff_eq!(m, by_tail, epsilon = 1e-9);
        assert_abs_diff_eq!(m, by_density, epsilon = 1e-9);
    }
}

#[test]
fn discrete_mean_matches_explicit_sum() {
    let p = params(0.5, 1.0);
    for n in [1usize, 2, 3, 10, 50] {
        let explicit: f64 = (0..n)
            .map(|i| value_of_priority(0.5, 1.0, i as f64 / n as f64) / n as f64)
            .sum();
        assert_abs_diff_eq!(
            mechanisms::discrete_mean(&p, n).unwrap(),
            explicit,
            epsilon = 1e-13
        );
    }
    assert_abs_diff_eq!(
        mechanisms::discrete_mean(&p, 2).unwrap(),
        7.0 / 6.0,
        epsilon = 1e-15
    );
}

#[test]
fn discrete_is_dominated_by_random() {
    for rho in [0.2, 0.5, 0.8] {
        let p = params(rho, 1.0);
        let grid = mechanisms::discrete_grid(&p, 20).unwrap();
        let d = DiscretePrice::new(grid).unwrap();
        let (lo, hi) = p.value_bounds();
        for i in 0..=500 {
            let x = lo + (hi - lo) * i as f64 / 500.0;
            assert!(d.cdf(x) >= mechanisms::random_price_cdf(&p, x) - 1e-12);
        }
    }
}

#[test]
fn auction_density_matches_cdf_difference() {
    let p = params(0.5, 1.0);
    let ymax = mechanisms::auction_support_max(&p);
    assert_abs_diff_eq!(ymax, 3.0, epsilon = 1e-12);
    let h = 1e-6;
    for i in 1..100 {
        let y = ymax * i as f64 / 100.0;
        let fd = (mechanisms::auction_cdf_homogeneous(&p, y + h)
            - mechanisms::auction_cdf_homogeneous(&p, y - h))
            / (2.0 * h);
        assert_abs_diff_eq!(
            mechanisms::auction_density_homogeneous(&p, y),
            fd,
            epsilon = 1e-6
        );
    }
    let integral = simpson(
        |y| mechanisms::auction_density_homogeneous(&p, y),
        0.0,
        ymax,
        4000,
    );
    assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-9);
}

#[test]
fn auction_quantile_inverts_cdf() {
    let p = params(0.3, 1.0);
    for i in 0..=100 {
        let u = i as f64 / 100.0;
        let y = mechanisms::auction_quantile_homogeneous(&p, u).unwrap();
        assert_abs_diff_eq!(
            mechanisms::auction_cdf_homogeneous(&p, y),
            u,
            epsilon = 1e-12
        );
    }
}

#[test]
fn hetero_profit_against_simpson() {
    let p = params(0.5, 1.0);
    let dists = [
        CostDistribution::uniform(0.0, 2.0).unwrap(),
        CostDistribution::uniform(1.0, 3.0).unwrap(),
        CostDistribution::exponential(1.5).unwrap(),
        CostDistribution::lognormal(0.0, 0.5).unwrap(),
        CostDistribution::truncated_normal(1.0, 0.5).unwrap(),
    ];
    for d in dists {
        let (a, b) = d.integration_range();
        let oracle = simpson(
            |c| c * value_of_priority(0.5, 1.0, d.cdf(c)) * d.pdf(c),
            a,
            b,
            200_000,
        );
        let got = mechanisms::hetero_profit(&p, &d).unwrap().value;
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-7);
        let (lo, hi) = mechanisms::hetero_profit_bounds(&p, &d);
        assert!(lo < got && got < hi, "{d}: {got} not in ({lo}, {hi})");
    }
}

#[test]
fn hetero_auction_payment_and_mean() {
    let p = params(0.5, 1.0);
    let d = CostDistribution::uniform(0.0, 2.0).unwrap();
    let at_top = mechanisms::auction_payment_hetero(&p, &d, 2.0)
        .unwrap()
        .value;
    assert_abs_diff_eq!(at_top, 3.0, epsilon = 1e-9);
    let direct = mechanisms::auction_mean_hetero(&p, &d).unwrap().value;
    let fubini = auction_hetero_mean_fubini(0.5, 1.0, |y| d.cdf(y), |y| d.pdf(y), 0.0, 2.0);
    assert_abs_diff_eq!(direct, fubini, epsilon = 1e-8);
    assert_abs_diff_eq!(direct, 1.0, epsilon = 1e-8);

    let e = CostDistribution::exponential(1.0).unwrap();
    let (a, b) = e.integration_range();
    let direct = mechanisms::auction_mean_hetero(&p, &e).unwrap().value;
    let fubini = auction_hetero_mean_fubini(0.5, 1.0, |y| e.cdf(y), |y| e.pdf(y), a, b);
    assert_abs_diff_eq!(direct, fubini, epsilon = 1e-7);
}

#[test]
fn cost_means_against_simpson() {
    let dists = [
        (CostDistribution::uniform(0.0, 2.0).unwrap(), 1.0),
        (CostDistribution::exponential(2.0).unwrap(), 0.5),
        (CostDistribution::lognormal(0.0, 1.0).unwrap(), 0.5f64.exp()),
    ];
    for (d, exact) in dists {
        let (a, b) = d.integration_range();
        let m = trapezoid(|c| c * d.pdf(c), a, b, 400_000);
        assert_abs_diff_eq!(d.mean(), exact, epsilon = 1e-12);
        assert_abs_diff_eq!(m, exact, epsilon = 1e-6);
    }
}

#[test]
fn mixed_equilibrium_matches_bisection() {
    let p = params(0.5, 1.0);
    for tau in [1.1, 1.5, 1.9] {
        let q = game::indifference_fraction(&p, tau).unwrap();
        let oracle = bisect(|u| value_of_priority(0.5, 1.0, u) - tau, 0.0, 1.0);
        assert_abs_diff_eq!(q.value(), oracle, epsilon = 1e-12);
    }
}

#[test]
fn elimination_agrees_with_level_analysis() {
    let p = params(0.6, 1.0);
    for n in [1usize, 5, 40] {
        let grid = mechanisms::discrete_grid(&p, n).unwrap();
        let elim = game::iterated_elimination(&p, &grid);
        assert!(elim.all_pay());
        assert_eq!(elim.rounds, n);
        let d = DiscretePrice::new(grid).unwrap();
        assert!(game::verify_unique_all_pay(&p, &d, 1000).unwrap().holds);
    }
}

proptest! {
    #[test]
    fn quantile_matches_oracle_inverse(rho in 0.05f64..0.95, u in 0.0f64..1.0) {
        let p = params(rho, 1.0);
        let price = mechanisms::random_price_quantile(&p, u).unwrap();
        prop_assert!((price - value_of_priority(rho, 1.0, u)).abs() <= 1e-12 * price);
        let via_sample = mechanisms::sample_price(
            &PriceMechanism::RandomOptimal { params: p },
            PriceIndex::Uniform(u),
        ).unwrap();
        prop_assert_eq!(via_sample, price);
    }

    #[test]
    fn hetero_price_between_value_bounds(rho in 0.05f64..0.95, c in 0.0f64..2.0) {
        let p = params(rho, 1.0);
        let d = CostDistribution::uniform(0.0, 2.0).unwrap();
        let (f0, f1) = p.value_bounds();
        let price = mechanisms::hetero_price(&p, &d, c);
        prop_assert!(price >= c * f0 - 1e-12 && price <= c * f1 + 1e-12);
        prop_assert!((price - c * value_of_priority(rho, 1.0, c / 2.0)).abs() <= 1e-12 * (1.0 + price));
    }

    #[test]
    fn auction_mean_close_form(rho in 0.05f64..0.9) {
        let p = params(rho, 1.0);
        let ymax = mechanisms::auction_support_max(&p);
        let mean = adaptive_simpson(&|y| 1.0 - mechanisms::auction_cdf_homogeneous(&p, y), 0.0, ymax, 1e-12);
        prop_assert!((mechanisms::auction_mean_homogeneous(&p) - mean).abs() <= 1e-8 * (1.0 + mean));
    }

    #[test]
    fn flat_counts_by_region(rho in 0.05f64..0.95, t in 0.0f64..3.0) {
        let p = params(rho, 1.0);
        let f0 = value_of_priority(rho, 1.0, 0.0);
        let f1 = value_of_priority(rho, 1.0, 1.0);
        let tau = f0 * 0.5 + t * (f1 - f0);
        let rep = game::flat_price_equilibria(&p, tau).unwrap();
        let margin = 1e-8;
        if tau < f0 - margin || tau > f1 + margin {
            prop_assert_eq!(rep.len(), 1);
        } else if tau > f0 + margin && tau < f1 - margin {
            prop_assert_eq!(rep.len(), 3);
            prop_assert_eq!(rep.revenue_worst_case, 0.0);
        }
    }
}
