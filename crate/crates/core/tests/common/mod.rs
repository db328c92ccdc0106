//! Independent numerical oracles for the integration tests. Nothing here
//! calls into the crate's own quadrature or closed forms.
#![allow(dead_code, clippy::too_many_arguments)]

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Composite trapezoid rule.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + i as f64 * h);
    }
    s * h
}

/// Recursive adaptive Simpson with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Root of a monotone function by bisection on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Value of priority written out from the two class waits.
pub fn value_of_priority(lambda: f64, mu: f64, q: f64) -> f64 {
    let rho = lambda / mu;
    let w1 = 1.0 / (mu * (1.0 - q * rho));
    let w2 = w1 / (1.0 - rho);
    w2 - w1
}

/// Inverts `F` by bisection to get the optimal random price CDF pointwise:
/// the price `p` such that `value_of_priority(F(p)) = p`.
pub fn optimal_cdf_by_fixed_point(lambda: f64, mu: f64, p: f64) -> f64 {
    let lo = value_of_priority(lambda, mu, 0.0);
    let hi = value_of_priority(lambda, mu, 1.0);
    if p <= lo {
        return 0.0;
    }
    if p >= hi {
        return 1.0;
    }
    bisect(|u| value_of_priority(lambda, mu, u) - p, 0.0, 1.0)
}

/// Mean of a CDF supported on `[lo, hi]` as `lo + ∫ (1 - F)`.
pub fn mean_from_cdf<F: Fn(f64) -> f64>(cdf: F, lo: f64, hi: f64, tol: f64) -> f64 {
    lo + adaptive_simpson(&|p| 1.0 - cdf(p), lo, hi, tol)
}

/// Mean bidder payment of the heterogeneous auction, computed through the
/// Fubini-swapped single integral `(2 rho / mu) ∫ g (1 - G) / (1 - G rho)^3`.
pub fn auction_hetero_mean_fubini<G, D>(rho: f64, mu: f64, cdf: G, pdf: D, a: f64, b: f64) -> f64
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let h = |y: f64| {
        let g = cdf(y);
        pdf(y) * (1.0 - g) / (1.0 - g * rho).powi(3)
    };
    2.0 * rho / mu * adaptive_simpson(&h, a, b, 1e-13)
}

/// Sample mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
