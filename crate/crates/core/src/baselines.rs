//! Linear benchmark estimators working directly on the quantizer output.

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, herm, lstsq};
use crate::scalar::Real;
use crate::training::TrainingMatrix;

/// Bussgang linearization `Q(y) = (1 - eta) y + w_q` of the quantizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BussgangModel<T> {
    pub gain: T,
    /// Per-entry variance of `(1 - eta) w + w_q`.
    pub eff_noise_var: T,
    pub eta: T,
}

impl<T: Real> BussgangModel<T> {
    /// `signal_power` is the per-entry power of the noiseless product `U E`.
    pub fn new(eta: T, noise_var: T, signal_power: T) -> Result<Self> {
        if !(eta >= T::zero() && eta < T::one()) {
            return Err(Error::Domain(format!("distortion factor {eta} outside [0, 1)")));
        }
        let gain = T::one() - eta;
        let eff_noise_var = gain * gain * noise_var + eta * gain * (signal_power + noise_var);
        if !(eff_noise_var > T::zero()) {
            return Err(Error::Degenerate("effective noise variance is not positive".into()));
        }
        Ok(Self { gain, eff_noise_var, eta })
    }
}

fn check_obs<T: Real>(y: &Array2<Complex<T>>, training: &TrainingMatrix<T>) -> Result<()> {
    if y.ncols() != training.e.ncols() {
        return Err(Error::Dimension(format!(
            "observations have {} columns, training has {}",
            y.ncols(),
            training.e.ncols()
        )));
    }
    Ok(())
}

/// `U = Y E^H (E E^H)^-1`, solved as the least-squares problem
/// `min ||E^H U^H - Y^H||` by Householder QR.
pub fn ls_estimate<T: Real>(y: &Array2<Complex<T>>, training: &TrainingMatrix<T>) -> Result<Array2<Complex<T>>> {
    check_obs(y, training)?;
    let a = herm(training.e.view());
    let b = herm(y.view());
    let x = lstsq(a.view(), b.view())?;
    Ok(herm(x.view()))
}

/// `U = Y E^H [ (1 - eta) E E^H + ((1 - eta) sigma_w^2 / sigma_u^2 + eta N) I ]^-1`.
pub fn almmse_estimate<T: Real>(
    y: &Array2<Complex<T>>,
    training: &TrainingMatrix<T>,
    model: &BussgangModel<T>,
    noise_var: T,
    prior_var: T,
    antennas: usize,
) -> Result<Array2<Complex<T>>> {
    check_obs(y, training)?;
    if !(prior_var > T::zero()) {
        return Err(Error::Domain("prior variance must be positive".into()));
    }
    let gain = model.gain;
    let ridge = gain * noise_var / prior_var + model.eta * T::of(antennas as f64);
    let mut a = training.gram().mapv(|z| z * gain);
    for i in 0..a.nrows() {
        a[[i, i]] += Complex::new(ridge, T::zero());
    }
    // A is Hermitian, so U A = Y E^H  <=>  A U^H = E Y^H
    let rhs = training.e.dot(&herm(y.view()));
    let x = cholesky_solve(a.view(), rhs.view())
        .map_err(|e| Error::Singular(format!("regularized Gram matrix: {e}")))?;
    Ok(herm(x.view()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian_matrix;
    use crate::linalg::frobenius_sqr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: &Array2<Complex<f64>>, b: &Array2<Complex<f64>>) -> f64 {
        (frobenius_sqr((a - b).view()) / frobenius_sqr(b.view())).sqrt()
    }

    #[test]
    fn noiseless_ls_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let training = TrainingMatrix::build(8, 64, 1).unwrap();
        let u = complex_gaussian_matrix(16, 8, 1.0, &mut rng);
        let y = u.dot(&training.e);
        assert!(rel_err(&ls_estimate(&y, &training).unwrap(), &u) <= 1e-10);
    }

    #[test]
    fn ls_on_orthogonal_rows_is_scaled_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let training = TrainingMatrix::build(8, 64, 1).unwrap();
        let y = complex_gaussian_matrix(5, 64, 1.0, &mut rng);
        let direct = y.dot(&herm(training.e.view())).mapv(|z| z / 64.0);
        assert!(rel_err(&ls_estimate(&y, &training).unwrap(), &direct) <= 1e-10);
    }

    #[test]
    fn almmse_without_distortion_or_noise_is_ls() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let training = TrainingMatrix::build(4, 40, 1).unwrap();
        let y = complex_gaussian_matrix(6, 40, 1.0, &mut rng);
        let model = BussgangModel::new(0.0, 1e-300, 1.0).unwrap();
        let a = almmse_estimate(&y, &training, &model, 1e-300, 1.0, 6).unwrap();
        let b = ls_estimate(&y, &training).unwrap();
        assert!(rel_err(&a, &b) <= 1e-8);
    }

    #[test]
    fn bussgang_model_fields() {
        let m = BussgangModel::new(0.25_f64, 2.0, 6.0).unwrap();
        assert_eq!(m.gain, 0.75);
        assert!((m.eff_noise_var - (0.5625 * 2.0 + 0.25 * 0.75 * 8.0)).abs() < 1e-14);
        assert!(BussgangModel::new(1.0_f64, 1.0, 1.0).is_err());
    }

    #[test]
    fn mismatched_columns() {
        let training = TrainingMatrix::<f64>::build(4, 40, 1).unwrap();
        let y = Array2::<Complex<f64>>::zeros((3, 39));
        assert!(matches!(ls_estimate(&y, &training), Err(Error::Dimension(_))));
    }
}
