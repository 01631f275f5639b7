use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::frobenius_sqr;
use crate::scalar::Real;
use crate::training::TrainingMatrix;

/// `||U_hat - U||_F^2 / ||U||_F^2`.
pub fn nmse<T: Real>(u_hat: &Array2<Complex<T>>, u: &Array2<Complex<T>>) -> Result<T> {
    if u_hat.dim() != u.dim() {
        return Err(Error::Dimension(format!("estimate is {:?}, truth is {:?}", u_hat.dim(), u.dim())));
    }
    let energy = frobenius_sqr(u.view());
    if !(energy > T::zero()) {
        return Err(Error::Degenerate("true channel has zero energy".into()));
    }
    Ok(frobenius_sqr((u_hat - u).view()) / energy)
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Noise power per complex sample giving `snr_db` for the realized
/// `||U E||_F^2`.
pub fn calibrate_noise<T: Real>(u: &Array2<Complex<T>>, training: &TrainingMatrix<T>, snr_db: f64) -> Result<T> {
    if !snr_db.is_finite() {
        return Err(Error::Config("snr_db must be finite".into()));
    }
    if u.ncols() != training.e.nrows() {
        return Err(Error::Dimension(format!("U has {} columns, E has {} rows", u.ncols(), training.e.nrows())));
    }
    let z = u.dot(&training.e);
    noise_for_signal(&z, snr_db)
}

/// Noise power per complex sample for a given noiseless signal matrix.
pub fn noise_for_signal<T: Real>(z: &Array2<Complex<T>>, snr_db: f64) -> Result<T> {
    let energy = frobenius_sqr(z.view());
    if !(energy > T::zero()) {
        return Err(Error::Degenerate("noiseless signal has zero energy".into()));
    }
    let count = T::of(z.len() as f64);
    Ok(energy / (count * T::of(db_to_linear(snr_db))))
}

/// Noise power from the model expectation `E|z|^2 = sigma_u^2 sum_m |e_mt|^2`.
pub fn ensemble_noise<T: Real>(entry_var: f64, training: &TrainingMatrix<T>, snr_db: f64) -> T {
    let mean_row_power = training.power().sum().as_f64() / training.seq_len as f64;
    T::of(entry_var * mean_row_power / db_to_linear(snr_db))
}

/// Mean, median and standard error of a sample.
pub fn summarize(xs: &[f64]) -> (f64, f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) { 0.5 * (sorted[mid - 1] + sorted[mid]) } else { sorted[mid] };
    let stderr = if xs.len() > 1 {
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    (mean, median, stderr)
}
