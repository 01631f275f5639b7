use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_chanest::channel::complex_gaussian_matrix;
use ris_chanest::linalg::frobenius_sqr;
use ris_chanest::quantizer::{distortion_factor, optimal_stepsize, quantize};
use ris_chanest::Resolution;

#[test]
fn one_bit_constants() {
    assert!((distortion_factor(1).unwrap() - (1.0 - 2.0 / PI)).abs() < 1e-3);
    assert!((optimal_stepsize(1).unwrap() - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-3);
}

#[test]
fn distortion_is_decreasing_in_bits() {
    let etas: Vec<f64> = (1..=8).map(|b| distortion_factor(b).unwrap()).collect();
    assert!(etas.windows(2).all(|w| w[1] < w[0]), "{etas:?}");
    assert!(etas[7] < 1e-3);
}

#[test]
fn empirical_distortion_matches_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let y: Array2<Complex<f64>> = complex_gaussian_matrix(1000, 1000, 1.0, &mut rng);
    let energy = frobenius_sqr(y.view());
    for bits in 1..=5 {
        let q = quantize(&y, Resolution::Bits(bits)).unwrap();
        let measured = frobenius_sqr((&q.values - &y).view()) / energy;
        let model = distortion_factor(bits).unwrap();
        assert!((measured / model - 1.0).abs() < 0.01, "B={bits}: measured {measured}, model {model}");
    }
}

#[test]
fn output_alphabet_size() {
    // unit-power calibration, then a sweep well past the outer thresholds
    let samples = Array2::from_elem((1, 1), Complex::new(1.0, 1.0));
    let y = Array2::from_shape_fn((1, 40001), |(_, k)| Complex::new((k as f64 - 20000.0) / 1000.0, 0.0));
    for bits in 1..=4 {
        let spec = ris_chanest::quantizer::QuantizerSpec::calibrate_optimal(Resolution::Bits(bits), &samples).unwrap();
        let mut levels: Vec<f64> = spec.quantize(&y).values.iter().map(|z| z.re).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        assert_eq!(levels.len(), 1 << bits);
    }
}
