mod common;

use ris_chanest::denoise::{quantized_posterior, GaussianBelief};

#[test]
fn closed_form_matches_quadrature() {
    let r = common::denoiser_oracle(1000, 2024);
    assert!(r.saturation_cases > 100, "only {} saturation cases", r.saturation_cases);
    assert!(r.max_mean_err <= 1e-6, "mean error {:e}", r.max_mean_err);
    assert!(r.max_var_err <= 1e-6, "variance error {:e}", r.max_var_err);
}

#[test]
fn distant_bins_against_quadrature() {
    // bins several standard deviations from the belief exercise the tail ratios
    for &(p, v, lo, hi) in &[
        (0.0, 1.0, 4.0, 5.0),
        (0.0, 1.0, -6.0, -5.0),
        (1.0, 0.25, 3.5, f64::INFINITY),
        (-0.5, 0.1, f64::NEG_INFINITY, -2.5),
        (0.0, 2.0, 0.0, 0.3),
    ] {
        let noise = 0.2;
        let level = if hi.is_finite() && lo.is_finite() { 0.5 * (lo + hi) } else if hi.is_infinite() { lo } else { hi };
        let closed = quantized_posterior(GaussianBelief { mean: p, var: v }, level, (lo, hi), noise);
        let (mean, var) = common::posterior_by_quadrature(p, v, lo, hi, noise / 2.0);
        assert!((closed.mean - mean).abs() <= 1e-6, "({p},{v},{lo},{hi}): mean {} vs {mean}", closed.mean);
        assert!((closed.var - var).abs() <= 1e-6, "({p},{v},{lo},{hi}): var {} vs {var}", closed.var);
    }
}
