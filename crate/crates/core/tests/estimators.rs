mod common;

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_chanest::baselines::{almmse_estimate, ls_estimate, BussgangModel};
use ris_chanest::channel::{build_channels, complex_gaussian_matrix, sample_paths};
use ris_chanest::harness::{calibrate_noise, nmse, run_experiment, RunOptions};
use ris_chanest::linalg::frobenius_sqr;
use ris_chanest::quantizer::quantize;
use ris_chanest::training::TrainingMatrix;
use ris_chanest::{Estimator, Resolution, SystemConfig};

fn small() -> SystemConfig {
    SystemConfig {
        antennas: 16,
        ris_elements: 8,
        training_len: 64,
        paths_bs_ris: 2,
        paths_ris_user: 2,
        trials: 8,
        ..SystemConfig::default()
    }
}

#[test]
fn ls_is_unbiased() {
    let cfg = small();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = build_channels(&sample_paths::<f64, _>(&cfg, &mut rng), &cfg).unwrap().u;
    let training = TrainingMatrix::build(8, 64, 1).unwrap();
    let z = u.dot(&training.e);
    let sw2 = calibrate_noise(&u, &training, 0.0).unwrap();
    let reps = 400;
    let mut acc = Array2::<Complex<f64>>::zeros(u.dim());
    let mut single = 0.0;
    for _ in 0..reps {
        let y = &z + &complex_gaussian_matrix(16, 64, sw2, &mut rng);
        let est = ls_estimate(&y, &training).unwrap();
        single += nmse(&est, &u).unwrap() / reps as f64;
        acc += &est;
    }
    let avg = acc.mapv(|x| x / reps as f64);
    // averaging removes the noise: error shrinks like 1 / reps
    let bias = nmse(&avg, &u).unwrap();
    assert!(bias < 3.0 * single / reps as f64, "bias {bias}, single-shot {single}");
}

#[test]
fn almmse_matches_direct_ridge_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let training = TrainingMatrix::<f64>::build(6, 50, 1).unwrap();
    let u = complex_gaussian_matrix(10, 6, 2.0, &mut rng);
    let y = &u.dot(&training.e) + &complex_gaussian_matrix(10, 50, 0.5, &mut rng);
    let q = quantize(&y, Resolution::Bits(2)).unwrap();
    let model = BussgangModel::new(q.spec.eta, 0.5, 12.0).unwrap();
    let got = almmse_estimate(&q.values, &training, &model, 0.5, 2.0, 10).unwrap();

    let e = DMatrix::from_fn(6, 50, |i, j| training.e[[i, j]]);
    let yq = DMatrix::from_fn(10, 50, |i, j| q.values[[i, j]]);
    let eta = q.spec.eta;
    let ridge = (1.0 - eta) * 0.5 / 2.0 + eta * 10.0;
    let a = &e * e.adjoint() * Complex::new(1.0 - eta, 0.0) + DMatrix::identity(6, 6) * Complex::new(ridge, 0.0);
    let want = &yq * e.adjoint() * a.try_inverse().unwrap();
    for ((i, j), z) in got.indexed_iter() {
        assert!((z - want[(i, j)]).norm() < 1e-10, "entry ({i},{j})");
    }
}

#[test]
fn noise_calibration_hits_target_snr() {
    let cfg = SystemConfig::default();
    let training = TrainingMatrix::build(cfg.ris_elements, cfg.training_len, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &snr in &[-10.0, 0.0, 10.0, 20.0] {
        for _ in 0..25 {
            let u = build_channels(&sample_paths::<f64, _>(&cfg, &mut rng), &cfg).unwrap().u;
            let z = u.dot(&training.e);
            let sw2 = calibrate_noise(&u, &training, snr).unwrap();
            let w = complex_gaussian_matrix(cfg.antennas, cfg.training_len, sw2, &mut rng);
            let measured = 10.0 * (frobenius_sqr(z.view()) / frobenius_sqr(w.view())).log10();
            assert!((measured - snr).abs() <= 0.2, "target {snr} dB, measured {measured} dB");
        }
    }
}

#[test]
fn single_precision_pipeline_tracks_double() {
    let cfg = SystemConfig { resolution: Resolution::Bits(3), snr_db: 10.0, ..small() };
    let lo = run_experiment::<f32>(&cfg, RunOptions::default()).unwrap();
    let hi = run_experiment::<f64>(&cfg, RunOptions::default()).unwrap();
    for (a, b) in lo.summary.iter().zip(&hi.summary) {
        assert_eq!(a.estimator, b.estimator);
        assert_eq!(a.trials_ok, cfg.trials);
        let gap = 10.0 * (a.median_nmse / b.median_nmse).log10();
        assert!(gap.abs() < 0.1, "{}: f32 and f64 differ by {gap} dB", a.estimator);
    }
}

#[test]
fn default_trace_is_self_averaging() {
    let cfg = SystemConfig { trials: 20, estimators: vec![Estimator::BigAmp], ..SystemConfig::default() };
    let out = run_experiment::<f64>(&cfg, RunOptions { workers: None, trace: true }).unwrap();
    let len = out.trials.iter().map(|t| t.trace.len()).max().unwrap();
    let medians: Vec<f64> = (0..len)
        .map(|i| {
            let at: Vec<f64> = out
                .trials
                .iter()
                .map(|t| t.trace.get(i).unwrap_or_else(|| t.trace.last().unwrap()).nmse)
                .collect();
            10.0 * common::median(&at).log10()
        })
        .collect();
    for i in 5..len {
        assert!(medians[i] <= medians[i - 1] + 0.5, "median trace rose at iteration {}: {medians:?}", i + 1);
    }
}
