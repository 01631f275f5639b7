//! Standard normal density, distribution and the interval ratios behind
//! truncated-Gaussian moments, evaluated without forming tiny
//! probability differences.

use crate::scalar::Real;

/// Below this argument the Mills ratio is computed as `Q(t) / phi(t)`;
/// above it the continued fraction takes over.
const MILLS_SWITCH: f64 = 6.0;
const MILLS_CF_TERMS: usize = 64;

/// Standard normal density.
#[inline]
pub fn pdf<T: Real>(x: T) -> T {
    if x.is_infinite() {
        return T::zero();
    }
    let inv_sqrt_2pi = T::of(0.398_942_280_401_432_7);
    inv_sqrt_2pi * (-(x * x) / T::of(2.0)).exp()
}

/// Standard normal distribution function `Phi(x)`.
#[inline]
pub fn cdf<T: Real>(x: T) -> T {
    T::of(0.5) * (-x / T::SQRT_2()).erfc()
}

/// Upper tail `Q(x) = 1 - Phi(x)`.
#[inline]
pub fn sf<T: Real>(x: T) -> T {
    T::of(0.5) * (x / T::SQRT_2()).erfc()
}

/// Mills ratio `Q(t) / phi(t)` for `t >= 0`; `R(+inf) = 0`.
pub fn mills_ratio<T: Real>(t: T) -> T {
    debug_assert!(!(t < T::zero()), "mills_ratio needs t >= 0, got {t}");
    if t.is_infinite() {
        return T::zero();
    }
    if t < T::of(MILLS_SWITCH) {
        return sf(t) / pdf(t);
    }
    // Laplace continued fraction 1/(t + 1/(t + 2/(t + 3/(t + ...)))).
    let mut tail = t;
    for k in (1..=MILLS_CF_TERMS).rev() {
        tail = t + T::of(k as f64) / tail;
    }
    T::one() / tail
}

/// Ratios of a standard normal restricted to the interval `(lower, upper)`:
///
/// * `pdf_ratio  = (phi(upper) - phi(lower)) / (Phi(upper) - Phi(lower))`
/// * `xpdf_ratio = (upper*phi(upper) - lower*phi(lower)) / (Phi(upper) - Phi(lower))`
///
/// with `x*phi(x) = 0` at infinite endpoints. Same-sign intervals are
/// reduced to Mills ratios so that far-tail intervals stay finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalRatios<T> {
    pub pdf_ratio: T,
    pub xpdf_ratio: T,
}

impl<T: Real> IntervalRatios<T> {
    pub fn new(upper: T, lower: T) -> Self {
        debug_assert!(upper > lower, "empty interval ({lower}, {upper})");
        let zero = T::zero();
        let half = T::of(0.5);
        if lower >= zero {
            // Upper tail: Phi(u) - Phi(l) = phi(l) (R(l) - rho R(u)), rho = phi(u)/phi(l).
            let rho = if upper.is_infinite() {
                zero
            } else {
                (-(upper - lower) * (upper + lower) * half).exp()
            };
            let upper_term = if upper.is_infinite() { zero } else { upper * rho };
            let denom = mills_ratio(lower) - rho * mills_ratio(upper);
            Self {
                pdf_ratio: (rho - T::one()) / denom,
                xpdf_ratio: (upper_term - lower) / denom,
            }
        } else if upper <= zero {
            // Lower tail, mirrored: rho = phi(l)/phi(u) <= 1.
            let rho = if lower.is_infinite() {
                zero
            } else {
                (-(upper - lower) * (-(upper + lower)) * half).exp()
            };
            let lower_term = if lower.is_infinite() { zero } else { lower * rho };
            let denom = mills_ratio(-upper) - rho * mills_ratio(-lower);
            Self {
                pdf_ratio: (T::one() - rho) / denom,
                xpdf_ratio: (upper - lower_term) / denom,
            }
        } else {
            // Straddles zero: the probability mass is bounded away from 0.
            let mass = half * ((upper / T::SQRT_2()).erf() - (lower / T::SQRT_2()).erf());
            let (pu, pl) = (pdf(upper), pdf(lower));
            let xu = if upper.is_infinite() { zero } else { upper * pu };
            let xl = if lower.is_infinite() { zero } else { lower * pl };
            Self {
                pdf_ratio: (pu - pl) / mass,
                xpdf_ratio: (xu - xl) / mass,
            }
        }
    }

    /// Mean and variance of a standard normal truncated to the interval.
    pub fn truncated_moments(&self) -> (T, T) {
        let mean = -self.pdf_ratio;
        let var = T::one() - self.xpdf_ratio - self.pdf_ratio * self.pdf_ratio;
        (mean, var)
    }
}
