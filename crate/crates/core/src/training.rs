//! Training matrix of RIS phase configurations built from cyclic shifts of
//! a Zadoff-Chu sequence (unit pilots).

use std::io::Write;

use ndarray::{Array1, Array2};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, herm};
use crate::scalar::{norm_sqr, Real};

/// Known training matrix `E`, `M x tau`, unit-modulus entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMatrix<T> {
    pub e: Array2<Complex<T>>,
    pub root: u64,
    pub seq_len: usize,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zadoff-Chu sequence `exp(-j pi r n (n + 1) / tau)` for odd `tau`,
/// `exp(-j pi r n^2 / tau)` for even `tau`.
pub fn zadoff_chu<T: Real>(len: usize, root: u64) -> Result<Array1<Complex<T>>> {
    if len == 0 {
        return Err(Error::Config("Zadoff-Chu length must be positive".into()));
    }
    if gcd(root, len as u64) != 1 {
        return Err(Error::InvalidRoot { root, len });
    }
    let period = 2 * len as u128;
    let r = root as u128;
    Ok(Array1::from_shape_fn(len, |n| {
        let n = n as u128;
        let k = if len % 2 == 1 { n * (n + 1) } else { n * n };
        // exact integer reduction keeps the phase accurate for long sequences
        let num = (r % period) * (k % period) % period;
        let phase = -std::f64::consts::PI * num as f64 / len as f64;
        let (s, c) = phase.sin_cos();
        Complex::new(T::of(c), T::of(s))
    }))
}

impl<T: Real> TrainingMatrix<T> {
    /// Row `m` is the base sequence cyclically shifted by `m * floor(tau / M)`.
    pub fn build(ris_elements: usize, tau: usize, root: u64) -> Result<Self> {
        if ris_elements == 0 {
            return Err(Error::Config("training needs at least one RIS element".into()));
        }
        if tau < ris_elements {
            return Err(Error::Config(format!(
                "training length {tau} shorter than RIS size {ris_elements}: E cannot have full row rank"
            )));
        }
        let base = zadoff_chu::<T>(tau, root)?;
        let shift = tau / ris_elements;
        let e = Array2::from_shape_fn((ris_elements, tau), |(m, t)| base[(t + m * shift) % tau]);
        Ok(Self { e, root, seq_len: tau })
    }

    pub fn ris_elements(&self) -> usize {
        self.e.nrows()
    }

    /// `E E^H`.
    pub fn gram(&self) -> Array2<Complex<T>> {
        self.e.dot(&herm(self.e.view()))
    }

    /// Squared entry moduli `|e_mt|^2`.
    pub fn power(&self) -> Array2<T> {
        self.e.mapv(norm_sqr)
    }

    /// 2-norm condition number of `E E^H` from power and inverse iteration.
    pub fn gram_condition(&self) -> Result<T> {
        let gram = self.gram();
        let m = gram.nrows();
        let iterate = |inverse: bool| -> Result<T> {
            let mut v = Array2::from_shape_fn((m, 1), |(i, _)| Complex::new(T::one(), T::of(0.1 * i as f64)));
            let mut lambda = T::zero();
            for _ in 0..200 {
                let w = if inverse { cholesky_solve(gram.view(), v.view())? } else { gram.dot(&v) };
                let norm = w.iter().map(|&z| norm_sqr(z)).sum::<T>().sqrt();
                let next = if inverse { T::one() / norm } else { norm };
                v = w.mapv(|z| z / norm);
                if (next - lambda).abs() <= T::epsilon() * next * T::of(8.0) {
                    lambda = next;
                    break;
                }
                lambda = next;
            }
            Ok(lambda)
        };
        let vmax = iterate(false)?;
        let vmin = iterate(true)?;
        Ok(vmax / vmin)
    }

    /// Writes `E` as CSV with columns `row,col,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "row,col,re,im")?;
        for ((m, t), z) in self.e.indexed_iter() {
            writeln!(out, "{m},{t},{},{}", z.re, z.im)?;
        }
        Ok(())
    }
}
