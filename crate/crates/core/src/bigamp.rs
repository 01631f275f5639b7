//! BiG-AMP with a known training matrix.
//!
//! The training matrix `E` is known, so its variances are zero and the
//! E-side messages disappear; each iteration is the twelve-step recursion
//!
//! ```text
//!  3  nu_p  = nu_u |E|^2
//!  4  p     = U E - s_prev .* nu_p
//!  5,6 (z, nu_z) = posterior of Z given the ADC output and N(p, nu_p)
//!  7  nu_s  = (1 - nu_z / nu_p) / nu_p
//!  8  s     = (z - p) / nu_p
//!  9  nu_q  = 1 / (nu_s |E^H|^2)
//! 10  q     = U + nu_q .* (s E^H)
//! 11,12 (U, nu_u) = posterior of U given N(q, nu_q) and the CN(0, sigma_u^2) prior
//! ```
//!
//! Damping blends the new `U, nu_u, s, nu_s` with the previous ones.

use ndarray::{Array2, Zip};
use num_complex::Complex;

use crate::config::AmpOptions;
use crate::denoise::{gaussian_prior_denoiser, quantized_posterior, unquantized_posterior, GaussianBelief};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sqr, herm};
use crate::quantizer::{Part, QuantizedMatrix};
use crate::scalar::Real;
use crate::training::TrainingMatrix;

/// Variance guard window applied after every step.
pub const VAR_MIN: f64 = 1e-12;
pub const VAR_MAX: f64 = 1e12;

/// Every per-iteration quantity of the recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpState<T> {
    pub u_hat: Array2<Complex<T>>,
    pub u_var: Array2<T>,
    pub p_hat: Array2<Complex<T>>,
    pub p_var: Array2<T>,
    pub z_hat: Array2<Complex<T>>,
    pub z_var: Array2<T>,
    pub s_hat: Array2<Complex<T>>,
    pub s_var: Array2<T>,
    pub q_hat: Array2<Complex<T>>,
    pub q_var: Array2<T>,
    /// Number of completed iterations.
    pub iteration: usize,
}

/// Initial state: `s = 0`, `nu_z = 1`, `z = 0`, `U = 0`, `nu_u = 1`.
pub fn amp_init<T: Real>(n: usize, m: usize, tau: usize) -> AmpState<T> {
    let czero = |shape| Array2::<Complex<T>>::zeros(shape);
    AmpState {
        u_hat: czero((n, m)),
        u_var: Array2::ones((n, m)),
        p_hat: czero((n, tau)),
        p_var: Array2::zeros((n, tau)),
        z_hat: czero((n, tau)),
        z_var: Array2::ones((n, tau)),
        s_hat: czero((n, tau)),
        s_var: Array2::zeros((n, tau)),
        q_hat: czero((n, m)),
        q_var: Array2::zeros((n, m)),
        iteration: 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpReport<T> {
    pub u_hat_final: Array2<Complex<T>>,
    pub iterations_run: usize,
    /// `||U(i+1) - U(i)||_F / ||U(i)||_F` per iteration.
    pub per_iteration_residual: Vec<T>,
    /// Multiply-accumulate operations over the whole run.
    pub op_count: u64,
    /// Entries of `nu_s` that came out negative and were clamped to zero.
    pub clamped_s: usize,
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats<T> {
    pub residual: T,
    pub macs: u64,
    pub clamped_s: usize,
}

/// One estimation problem: the ADC output, the training, and the model
/// statistics. Holds the precomputed `E^H`, `|E|^2` and bin tables.
pub struct BigAmp<'a, T: Real> {
    obs: &'a QuantizedMatrix<T>,
    e: &'a Array2<Complex<T>>,
    e_h: Array2<Complex<T>>,
    e_pow: Array2<T>,
    e_pow_t: Array2<T>,
    bounds_re: Vec<(T, T)>,
    bounds_im: Vec<(T, T)>,
    noise_var: T,
    prior_var: T,
}

fn clamp_var<T: Real>(x: T) -> T {
    x.max(T::of(VAR_MIN)).min(T::of(VAR_MAX))
}

fn macs(a: (usize, usize), b: (usize, usize)) -> u64 {
    (a.0 * a.1 * b.1) as u64
}

fn check_finite<T: Real>(name: &str, iteration: usize, mut it: impl Iterator<Item = T>) -> Result<()> {
    if it.all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical { iteration, reason: format!("non-finite entry in {name}") })
    }
}

impl<'a, T: Real> BigAmp<'a, T> {
    pub fn new(obs: &'a QuantizedMatrix<T>, training: &'a TrainingMatrix<T>, noise_var: T, prior_var: T) -> Result<Self> {
        let (n, tau) = obs.values.dim();
        if training.e.ncols() != tau {
            return Err(Error::Dimension(format!(
                "observations have {tau} columns, training has {}",
                training.e.ncols()
            )));
        }
        if n == 0 || training.e.nrows() == 0 {
            return Err(Error::Dimension("empty problem".into()));
        }
        if !(noise_var > T::zero()) || !(prior_var > T::zero()) {
            return Err(Error::Config("noise and prior variances must be positive".into()));
        }
        let table = |part| -> Result<Vec<(T, T)>> {
            match obs.spec.levels_per_dim() {
                None => Ok(Vec::new()),
                // index 0 is unused; bins are 1-based
                Some(levels) => std::iter::once(Ok((T::zero(), T::zero())))
                    .chain((1..=levels).map(|b| obs.spec.bin_bounds(b as u16, part)))
                    .collect(),
            }
        };
        let e_pow = training.power();
        Ok(Self {
            obs,
            e: &training.e,
            e_h: herm(training.e.view()),
            e_pow_t: e_pow.t().to_owned(),
            e_pow,
            bounds_re: table(Part::Re)?,
            bounds_im: table(Part::Im)?,
            noise_var,
            prior_var,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.obs.values.nrows(), self.e.nrows(), self.e.ncols())
    }

    pub fn init(&self) -> AmpState<T> {
        let (n, m, tau) = self.dims();
        amp_init(n, m, tau)
    }

    /// Steps 5-6 for one entry.
    fn output_posterior(&self, idx: (usize, usize), p: Complex<T>, p_var: T) -> (Complex<T>, T) {
        let half = T::of(0.5);
        let y = self.obs.values[idx];
        let re = GaussianBelief { mean: p.re, var: p_var * half };
        let im = GaussianBelief { mean: p.im, var: p_var * half };
        let (pr, pi) = match &self.obs.bins {
            Some(bins) => (
                quantized_posterior(re, y.re, self.bounds_re[bins.re[idx] as usize], self.noise_var),
                quantized_posterior(im, y.im, self.bounds_im[bins.im[idx] as usize], self.noise_var),
            ),
            None => (
                unquantized_posterior(re, y.re, self.noise_var),
                unquantized_posterior(im, y.im, self.noise_var),
            ),
        };
        (Complex::new(pr.mean, pi.mean), pr.var + pi.var)
    }

    /// One full pass of steps 3-12, in place.
    pub fn iterate(&self, state: &mut AmpState<T>, damping: T) -> Result<StepStats<T>> {
        let (n, m, tau) = self.dims();
        if state.u_hat.dim() != (n, m) || state.s_hat.dim() != (n, tau) {
            return Err(Error::Dimension(format!(
                "state is {:?}/{:?}, problem is N={n}, M={m}, tau={tau}",
                state.u_hat.dim(),
                state.s_hat.dim()
            )));
        }
        let iteration = state.iteration + 1;
        let one = T::one();
        let rho = damping;
        let keep = one - rho;
        let mut ops = 0u64;

        // steps 3-4
        let p_var = state.u_var.dot(&self.e_pow).mapv(clamp_var);
        ops += macs((n, m), (m, tau));
        let mut p_hat = state.u_hat.dot(self.e);
        ops += macs((n, m), (m, tau));
        Zip::from(&mut p_hat).and(&state.s_hat).and(&p_var).for_each(|p, &s, &v| *p -= s * v);
        ops += (n * tau) as u64;

        // steps 5-8
        let mut z_hat = Array2::<Complex<T>>::zeros((n, tau));
        let mut z_var = Array2::<T>::zeros((n, tau));
        let mut s_hat = Array2::<Complex<T>>::zeros((n, tau));
        let mut s_var = Array2::<T>::zeros((n, tau));
        let mut clamped_s = 0usize;
        for ((idx, &p), &vp) in p_hat.indexed_iter().zip(p_var.iter()) {
            let (z, vz) = self.output_posterior(idx, p, vp);
            let vz = clamp_var(vz);
            let mut vs = (one - vz / vp) / vp;
            if vs < T::zero() {
                vs = T::zero();
                clamped_s += 1;
            }
            z_hat[idx] = z;
            z_var[idx] = vz;
            s_hat[idx] = (z - p) / vp;
            s_var[idx] = vs;
        }
        if state.iteration > 0 {
            Zip::from(&mut s_hat).and(&state.s_hat).for_each(|s, &old| *s = *s * rho + old * keep);
            Zip::from(&mut s_var).and(&state.s_var).for_each(|s, &old| *s = *s * rho + old * keep);
        }

        // steps 9-10
        let q_var = s_var.dot(&self.e_pow_t).mapv(|x| clamp_var(one / x));
        ops += macs((n, tau), (tau, m));
        let back = s_hat.dot(&self.e_h);
        ops += macs((n, tau), (tau, m));
        let mut q_hat = state.u_hat.clone();
        Zip::from(&mut q_hat).and(&q_var).and(&back).for_each(|q, &v, &b| *q += b * v);
        ops += (n * m) as u64;

        // steps 11-12
        let mut u_hat = Array2::<Complex<T>>::zeros((n, m));
        let mut u_var = Array2::<T>::zeros((n, m));
        Zip::from(&mut u_hat).and(&mut u_var).and(&q_hat).and(&q_var).for_each(|u, uv, &q, &qv| {
            let (mean, var) = gaussian_prior_denoiser(q, qv, self.prior_var);
            *u = mean;
            *uv = var;
        });
        Zip::from(&mut u_hat).and(&state.u_hat).for_each(|u, &old| *u = *u * rho + old * keep);
        Zip::from(&mut u_var).and(&state.u_var).for_each(|u, &old| *u = clamp_var(*u * rho + old * keep));

        for (name, arr) in [("p_hat", &p_hat), ("z_hat", &z_hat), ("s_hat", &s_hat), ("q_hat", &q_hat), ("u_hat", &u_hat)] {
            check_finite(name, iteration, arr.iter().flat_map(|z| [z.re, z.im]))?;
        }
        for (name, arr) in [("p_var", &p_var), ("z_var", &z_var), ("s_var", &s_var), ("q_var", &q_var), ("u_var", &u_var)] {
            check_finite(name, iteration, arr.iter().copied())?;
        }

        let old_norm = frobenius_sqr(state.u_hat.view()).sqrt();
        let new_norm = frobenius_sqr(u_hat.view()).sqrt();
        // an estimate far outside the prior's energy means the recursion has run away
        let energy_cap = T::of(VAR_MAX) * T::of((n * m) as f64) * self.prior_var;
        if new_norm * new_norm > energy_cap {
            return Err(Error::Numerical { iteration, reason: "estimate energy exceeds the prior by 1e12".into() });
        }
        let change = frobenius_sqr((&u_hat - &state.u_hat).view()).sqrt();
        let denom = if old_norm > T::zero() { old_norm } else { new_norm };
        let residual = if denom > T::zero() { change / denom } else { T::zero() };

        *state = AmpState { u_hat, u_var, p_hat, p_var, z_hat, z_var, s_hat, s_var, q_hat, q_var, iteration };
        Ok(StepStats { residual, macs: ops, clamped_s })
    }

    /// Iterates from the initial state until `max_iter` or until the
    /// relative change of `U` drops below `stop_tol`. `observe` sees the
    /// state after every iteration.
    pub fn run(&self, opts: &AmpOptions, mut observe: impl FnMut(&AmpState<T>)) -> Result<AmpReport<T>> {
        opts.validate()?;
        let damping = T::of(opts.damping);
        let stop_tol = T::of(opts.stop_tol);
        let mut state = self.init();
        let mut residuals = Vec::with_capacity(opts.max_iter);
        let mut op_count = 0u64;
        let mut clamped_s = 0usize;
        for _ in 0..opts.max_iter {
            let stats = self.iterate(&mut state, damping)?;
            op_count += stats.macs;
            clamped_s += stats.clamped_s;
            residuals.push(stats.residual);
            observe(&state);
            if stats.residual < stop_tol {
                break;
            }
        }
        Ok(AmpReport {
            iterations_run: residuals.len(),
            u_hat_final: state.u_hat,
            per_iteration_residual: residuals,
            op_count,
            clamped_s,
        })
    }
}

/// Runs the estimator end to end.
pub fn amp_run<T: Real>(
    obs: &QuantizedMatrix<T>,
    training: &TrainingMatrix<T>,
    noise_var: T,
    prior_var: T,
    opts: &AmpOptions,
) -> Result<AmpReport<T>> {
    BigAmp::new(obs, training, noise_var, prior_var)?.run(opts, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Resolution;
    use crate::quantizer::quantize;
    use ndarray::Array2;

    fn toy_problem(resolution: Resolution) -> (QuantizedMatrix<f64>, TrainingMatrix<f64>) {
        let training = TrainingMatrix::build(4, 32, 1).unwrap();
        let u = Array2::from_shape_fn((6, 4), |(i, j)| Complex::new((i + j) as f64 * 0.3 - 1.0, 0.2 * i as f64 - 0.1 * j as f64));
        let z = u.dot(&training.e);
        (quantize(&z, resolution).unwrap(), training)
    }

    #[test]
    fn init_matches_prescribed_values() {
        let s: AmpState<f64> = amp_init(5, 3, 7);
        assert!(s.u_hat.iter().all(|z| *z == Complex::new(0.0, 0.0)));
        assert!(s.u_var.iter().all(|&v| v == 1.0));
        assert!(s.s_hat.iter().all(|z| *z == Complex::new(0.0, 0.0)));
        assert!(s.z_hat.iter().all(|z| *z == Complex::new(0.0, 0.0)));
        assert!(s.z_var.iter().all(|&v| v == 1.0));
        assert_eq!(s.u_hat.dim(), (5, 3));
        assert_eq!(s.p_hat.dim(), (5, 7));
        assert_eq!(s.q_var.dim(), (5, 3));
    }

    #[test]
    fn first_iteration_variances_with_unit_modulus_training() {
        let (obs, training) = toy_problem(Resolution::Bits(3));
        let amp = BigAmp::new(&obs, &training, 0.1, 1.0).unwrap();
        let mut state = amp.init();
        amp.iterate(&mut state, 1.0).unwrap();
        // step 3 with nu_u = 1: nu_p = M everywhere
        assert!(state.p_var.iter().all(|&v| (v - 4.0).abs() < 1e-12));
        // step 4 with s(0) = 0 is the plain product U E = 0
        assert!(state.p_hat.iter().all(|z| z.norm() == 0.0));
        // step 9: nu_q identical across m for unit-modulus training
        for row in state.q_var.rows() {
            assert!(row.iter().all(|&v| (v - row[0]).abs() <= 1e-12 * row[0]));
        }
        for (n, row) in state.q_var.rows().into_iter().enumerate() {
            let sum: f64 = state.s_var.row(n).sum();
            assert!((row[0] - 1.0 / sum).abs() <= 1e-12 * row[0]);
        }
    }

    #[test]
    fn infinite_stop_tolerance_runs_once() {
        let (obs, training) = toy_problem(Resolution::Bits(2));
        let opts = AmpOptions { stop_tol: f64::INFINITY, ..AmpOptions::default() };
        let report = amp_run(&obs, &training, 0.1, 1.0, &opts).unwrap();
        assert_eq!(report.iterations_run, 1);
    }

    #[test]
    fn deterministic_reports() {
        let (obs, training) = toy_problem(Resolution::Bits(1));
        let opts = AmpOptions::default();
        let a = amp_run(&obs, &training, 0.05, 1.0, &opts).unwrap();
        let b = amp_run(&obs, &training, 0.05, 1.0, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.iterations_run <= opts.max_iter);
    }

    #[test]
    fn runaway_estimate_is_a_numerical_failure() {
        let (obs, training) = toy_problem(Resolution::Bits(2));
        let amp = BigAmp::new(&obs, &training, 0.1, 1.0).unwrap();
        let mut state = amp.init();
        state.u_hat.fill(Complex::new(1e10, 0.0));
        assert!(matches!(amp.iterate(&mut state, 0.5), Err(Error::Numerical { .. })));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (obs, _) = toy_problem(Resolution::Bits(2));
        let other = TrainingMatrix::<f64>::build(4, 40, 1).unwrap();
        assert!(matches!(BigAmp::new(&obs, &other, 0.1, 1.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn mac_count_per_iteration() {
        let (obs, training) = toy_problem(Resolution::Infinite);
        let amp = BigAmp::new(&obs, &training, 0.1, 1.0).unwrap();
        let mut state = amp.init();
        let stats = amp.iterate(&mut state, 0.7).unwrap();
        let (n, m, tau) = (6u64, 4u64, 32u64);
        assert_eq!(stats.macs, 4 * n * m * tau + n * tau + n * m);
    }
}
