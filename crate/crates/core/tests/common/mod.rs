#![allow(dead_code, clippy::excessive_precision)]

use statrs::distribution::{ContinuousCDF, Normal};

/// Adaptive Gauss-Kronrod (7/15) quadrature on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const XK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ];
    const WK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    fn panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut kron = WK[7] * fc;
        let mut gauss = WG[3] * fc;
        for i in 0..7 {
            let pair = f(c - h * XK[i]) + f(c + h * XK[i]);
            kron += WK[i] * pair;
            if i % 2 == 1 {
                gauss += WG[i / 2] * pair;
            }
        }
        (kron * h, ((kron - gauss) * h).abs())
    }
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = panel(f, a, b);
        if err <= tol || depth == 0 {
            return value;
        }
        let c = 0.5 * (a + b);
        recurse(f, a, c, 0.5 * tol, depth - 1) + recurse(f, c, b, 0.5 * tol, depth - 1)
    }
    recurse(f, a, b, tol, 40)
}

/// `P(lo < X <= hi)` for standard normal `X`, without cancellation in the tails.
pub fn normal_mass(lo: f64, hi: f64) -> f64 {
    let n = Normal::standard();
    if lo >= 0.0 {
        n.sf(lo) - n.sf(hi)
    } else if hi <= 0.0 {
        n.cdf(hi) - n.cdf(lo)
    } else {
        1.0 - n.sf(hi) - n.cdf(lo)
    }
}

/// Posterior mean and variance of real `z ~ N(p, v)` given that `z + w`,
/// `w ~ N(0, sw2)`, fell in `(lo, hi]`, by direct numerical integration.
pub fn posterior_by_quadrature(p: f64, v: f64, lo: f64, hi: f64, sw2: f64) -> (f64, f64) {
    let sd = v.sqrt();
    let sw = sw2.sqrt();
    let weight = |z: f64| {
        let t = (z - p) / sd;
        (-0.5 * t * t).exp() * normal_mass((lo - z) / sw, (hi - z) / sw)
    };
    let (a, b) = (p - 12.0 * sd, p + 12.0 * sd);
    // break at the bin edges and start from fine panels so a narrow bin
    // cannot hide between the nodes of a coarse panel
    let mut knots = vec![a, b];
    for edge in [lo, hi] {
        for shift in [-6.0 * sw, 0.0, 6.0 * sw] {
            let k = edge + shift;
            if k.is_finite() && k > a && k < b {
                knots.push(k);
            }
        }
    }
    knots.sort_by(f64::total_cmp);
    let pieces = 64;
    let piecewise = |f: &dyn Fn(f64) -> f64| {
        let mut total = 0.0;
        for w in knots.windows(2) {
            let h = (w[1] - w[0]) / pieces as f64;
            for k in 0..pieces {
                let x0 = w[0] + k as f64 * h;
                total += integrate(f, x0, x0 + h, 1e-15);
            }
        }
        total
    };
    let z0 = piecewise(&weight);
    let mean = piecewise(&|z| z * weight(z)) / z0;
    let var = piecewise(&|z| (z - mean) * (z - mean) * weight(z)) / z0;
    (mean, var)
}

/// Median of a slice.
pub fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len().is_multiple_of(2) {
        0.5 * (s[m - 1] + s[m])
    } else {
        s[m]
    }
}

pub struct OracleReport {
    pub cases: usize,
    pub saturation_cases: usize,
    pub max_mean_err: f64,
    pub max_var_err: f64,
}

/// Compares the closed-form quantized posterior with quadrature over
/// randomized beliefs, noise levels and bit depths 1 to 3. Bins are drawn
/// from the generative model so every case has non-negligible likelihood.
pub fn denoiser_oracle(cases: usize, seed: u64) -> OracleReport {
    use ndarray::Array2;
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use ris_chanest::config::Resolution;
    use ris_chanest::denoise::{quantized_posterior, GaussianBelief};
    use ris_chanest::quantizer::{Part, QuantizerSpec};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport { cases, saturation_cases: 0, max_mean_err: 0.0, max_var_err: 0.0 };
    for _ in 0..cases {
        let bits = rng.random_range(1..=3u32);
        let power: f64 = rng.random_range(0.2..5.0);
        let samples = Array2::from_elem((1, 1), Complex::new(power.sqrt(), power.sqrt()));
        let spec = QuantizerSpec::calibrate_optimal(Resolution::Bits(bits), &samples).unwrap();
        let p: f64 = rng.random_range(-2.0..2.0) * power.sqrt();
        let v: f64 = power * 10f64.powf(rng.random_range(-2.0..0.5));
        let noise_var: f64 = power * 10f64.powf(rng.random_range(-3.0..0.5));
        let z = p + v.sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal);
        let y = z + (noise_var / 2.0).sqrt() * rng.sample::<f64, _>(rand_distr::StandardNormal);
        let (level, bin) = spec.quantize_real(y, Part::Re);
        let (lo, hi) = spec.bin_bounds(bin, Part::Re).unwrap();
        if lo.is_infinite() || hi.is_infinite() {
            report.saturation_cases += 1;
        }
        let closed = quantized_posterior(GaussianBelief { mean: p, var: v }, level, (lo, hi), noise_var);
        let (mean, var) = posterior_by_quadrature(p, v, lo, hi, noise_var / 2.0);
        report.max_mean_err = report.max_mean_err.max((closed.mean - mean).abs());
        report.max_var_err = report.max_var_err.max((closed.var - var).abs());
    }
    report
}
