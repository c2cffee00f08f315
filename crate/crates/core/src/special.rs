//! Poisson tail sums behind the Erlang closed forms.
//!
//! With `N ~ Poisson(x)` and unit rate, the Erlang(k) law satisfies
//! `F_k(x) = P(N ≥ k)` and `∫₀ˣ F_k(t) dt = E[(N − k)⁺]`. Each sum is
//! evaluated from whichever side avoids cancellation.

use statrs::function::gamma::ln_gamma;

fn pmf(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-x + f64::from(n) * x.ln() - ln_gamma(f64::from(n) + 1.0)).exp()
}

/// Sums `weight(n) · P(N = n)` for `n ≥ start` until terms are negligible.
fn upper_series(start: u32, x: f64, weight: impl Fn(u32) -> f64) -> f64 {
    let mut term = pmf(start, x);
    let mut n = start;
    let mut sum = 0.0;
    loop {
        let contribution = weight(n) * term;
        sum += contribution;
        n += 1;
        term *= x / f64::from(n);
        if term == 0.0 || (f64::from(n) > x && term * weight(n).max(1.0) <= 1e-17 * sum) {
            break;
        }
    }
    sum
}

/// Sums `weight(n) · P(N = n)` for `n < end`.
fn lower_sum(end: u32, x: f64, weight: impl Fn(u32) -> f64) -> f64 {
    if end == 0 {
        return 0.0;
    }
    let mut term = (-x).exp();
    let mut sum = 0.0;
    for n in 0..end {
        if n > 0 {
            term *= x / f64::from(n);
        }
        sum += weight(n) * term;
    }
    sum
}

/// `(F_k(x), 1 − F_k(x))` for the unit-rate Erlang(k) law.
pub(crate) fn erlang_cdf_sf(k: u32, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if x == f64::INFINITY {
        return (1.0, 0.0);
    }
    if x <= f64::from(k) {
        let lower = upper_series(k, x, |_| 1.0).min(1.0);
        (lower, 1.0 - lower)
    } else {
        let upper = lower_sum(k, x, |_| 1.0).min(1.0);
        (1.0 - upper, upper)
    }
}

/// `∫₀ˣ F_k(t) dt` for the unit-rate Erlang(k) law.
pub(crate) fn erlang_integrated_cdf(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let kf = f64::from(k);
    if x <= kf {
        upper_series(k + 1, x, |n| f64::from(n) - kf)
    } else {
        x - kf + lower_sum(k, x, |n| kf - f64::from(n))
    }
}
