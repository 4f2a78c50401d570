//! Standard normal density, distribution function and the two-sided tail.
//!
//! The distribution function goes through `erfc` so the upper tail keeps full
//! relative precision instead of cancelling against 1.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Density of N(0, 1).
pub fn pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Φ(z) = P(Z ≤ z).
pub fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// P(Z > z).
pub fn sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// P(|Z| ≥ t) for t ≥ 0.
pub fn two_sided_tail(t: f64) -> f64 {
    libm::erfc(t.abs() * FRAC_1_SQRT_2)
}

/// Median of |Z|: the θ with P(|Z| ≥ θ) = 1/2, equivalently Φ(θ) = 3/4.
///
/// Found by bisection down to a bracket width of 1e-12.
pub fn abs_median() -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < 0.75 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
