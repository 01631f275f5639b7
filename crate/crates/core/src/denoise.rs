//! Closed-form posterior moments used inside the message-passing loop.
//!
//! Complex beliefs `CN(p, v)` are handled as two independent real beliefs
//! `N(Re p, v/2)` and `N(Im p, v/2)`; the additive noise `CN(0, sigma_w^2)`
//! contributes `sigma_w^2 / 2` per real dimension.

use num_complex::Complex;

use crate::gaussian::IntervalRatios;
use crate::scalar::Real;

/// Real Gaussian belief `N(mean, var)` about one real dimension of `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBelief<T> {
    pub mean: T,
    pub var: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorMoments<T> {
    pub mean: T,
    pub var: T,
}

/// Posterior mean and variance of a real `z ~ N(p, v)` given that
/// `z + w`, `w ~ N(0, sigma_w^2 / 2)`, was quantized to `level` in the bin
/// `(lower, upper]`.
///
/// Written in the sign-folded form: with `s = sign(level)`,
/// `eta_1 = (s p - min|r|) / sqrt(v + sigma_w^2/2)` and
/// `eta_2 = (s p - max|r|) / sqrt(v + sigma_w^2/2)`, so the saturation bin has
/// `eta_2 = -inf`. The Phi-differences go through [`IntervalRatios`], which
/// never forms a probability difference that can round to zero.
pub fn quantized_posterior<T: Real>(
    belief: GaussianBelief<T>,
    level: T,
    bin: (T, T),
    noise_var: T,
) -> PosteriorMoments<T> {
    let (lower, upper) = bin;
    let zero = T::zero();
    // Mid-rise bins never straddle zero; for one that does, the unfolded
    // interval (s = +1) is the same formula.
    let sign = if upper <= zero && level < zero { -T::one() } else { T::one() };
    let (near, far) = if sign < zero { (-upper, -lower) } else { (lower, upper) };

    let v = belief.var;
    let total = v + noise_var / T::of(2.0);
    let sd = total.sqrt();
    let p_folded = sign * belief.mean;
    let eta1 = (p_folded - near) / sd;
    let eta2 = if far.is_infinite() { T::neg_infinity() } else { (p_folded - far) / sd };

    let r = IntervalRatios::new(eta1, eta2);
    let mean = belief.mean + sign * v / sd * r.pdf_ratio;
    let shrink = v * v / total;
    let var = v - shrink * (r.xpdf_ratio + r.pdf_ratio * r.pdf_ratio);
    let floor = v * T::epsilon();
    PosteriorMoments { mean, var: var.max(floor).min(v) }
}

/// Conjugate posterior of a real `z ~ N(p, v)` observed as `y = z + w`,
/// `w ~ N(0, sigma_w^2 / 2)`.
pub fn unquantized_posterior<T: Real>(belief: GaussianBelief<T>, observed: T, noise_var: T) -> PosteriorMoments<T> {
    let v = belief.var;
    let nv = noise_var / T::of(2.0);
    let gain = v / (v + nv);
    PosteriorMoments { mean: belief.mean + gain * (observed - belief.mean), var: v * nv / (v + nv) }
}

/// MMSE estimate of `u ~ CN(0, prior_var)` from `q = u + CN(0, pseudo_var)`.
pub fn gaussian_prior_denoiser<T: Real>(pseudo_obs: Complex<T>, pseudo_var: T, prior_var: T) -> (Complex<T>, T) {
    if pseudo_var.is_infinite() {
        return (Complex::new(T::zero(), T::zero()), prior_var);
    }
    let denom = prior_var + pseudo_var;
    (pseudo_obs * (prior_var / denom), prior_var * pseudo_var / denom)
}
