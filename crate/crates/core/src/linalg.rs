//! Small dense complex linear algebra: Hermitian transpose, Cholesky solves
//! and Householder least squares. Sizes here are at most a few hundred, so
//! plain loops over ndarray storage are sufficient.

use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{norm_sqr, Real};

/// Conjugate transpose.
pub fn herm<T: Real>(a: ArrayView2<'_, Complex<T>>) -> Array2<Complex<T>> {
    a.t().mapv(|z| z.conj())
}

/// Squared Frobenius norm.
pub fn frobenius_sqr<T: Real>(a: ArrayView2<'_, Complex<T>>) -> T {
    a.iter().map(|&z| norm_sqr(z)).sum()
}

/// Solve `A X = B` for Hermitian positive definite `A`.
pub fn cholesky_solve<T: Real>(
    a: ArrayView2<'_, Complex<T>>,
    b: ArrayView2<'_, Complex<T>>,
) -> Result<Array2<Complex<T>>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Dimension(format!(
            "cholesky_solve: A is {}x{}, B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    // A = L L^H, lower triangular L with real positive diagonal.
    let mut l = Array2::<Complex<T>>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]].re;
        for k in 0..j {
            d -= norm_sqr(l[[j, k]]);
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::Singular(format!("matrix not positive definite at pivot {j}")));
        }
        let d = d.sqrt();
        l[[j, j]] = Complex::new(d, T::zero());
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / d;
        }
    }
    let mut x = b.to_owned();
    for mut col in x.axis_iter_mut(Axis(1)) {
        for i in 0..n {
            let mut s = col[i];
            for k in 0..i {
                s -= l[[i, k]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in (i + 1)..n {
                s -= l[[k, i]].conj() * col[k];
            }
            col[i] = s / l[[i, i]];
        }
    }
    Ok(x)
}

/// Least-squares solution of `min ||A X - B||_F` with `A` tall and of full
/// column rank, via Householder QR.
pub fn lstsq<T: Real>(
    a: ArrayView2<'_, Complex<T>>,
    b: ArrayView2<'_, Complex<T>>,
) -> Result<Array2<Complex<T>>> {
    let (m, n) = a.dim();
    if b.nrows() != m {
        return Err(Error::Dimension(format!("lstsq: A has {m} rows, B has {}", b.nrows())));
    }
    if m < n {
        return Err(Error::Singular(format!("lstsq: {m}x{n} system is underdetermined")));
    }
    let mut r = a.to_owned();
    let mut qb = b.to_owned();
    let scale = r.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let rank_tol = scale * T::of(100.0 * m.max(n) as f64) * T::epsilon();

    for k in 0..n {
        let col_norm = (k..m).map(|i| norm_sqr(r[[i, k]])).sum::<T>().sqrt();
        if col_norm <= rank_tol {
            return Err(Error::Singular(format!("lstsq: column {k} is rank deficient")));
        }
        let pivot = r[[k, k]];
        let phase = if pivot.norm() > T::zero() {
            pivot / pivot.norm()
        } else {
            Complex::new(T::one(), T::zero())
        };
        // v = x + phase*|x| e_1; reflection H = I - 2 v v^H / (v^H v)
        let mut v: Vec<Complex<T>> = (k..m).map(|i| r[[i, k]]).collect();
        v[0] += phase * col_norm;
        let vnorm_sqr: T = v.iter().map(|&z| norm_sqr(z)).sum();
        let two = T::of(2.0);
        let apply = |mat: &mut Array2<Complex<T>>, c: usize| {
            let mut dot = Complex::new(T::zero(), T::zero());
            for (off, vi) in v.iter().enumerate() {
                dot += vi.conj() * mat[[k + off, c]];
            }
            let f = dot * two / vnorm_sqr;
            for (off, vi) in v.iter().enumerate() {
                mat[[k + off, c]] -= *vi * f;
            }
        };
        for c in k..n {
            apply(&mut r, c);
        }
        for c in 0..qb.ncols() {
            apply(&mut qb, c);
        }
    }

    let mut x = Array2::<Complex<T>>::zeros((n, b.ncols()));
    for c in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut s = qb[[i, c]];
            for k in (i + 1)..n {
                s -= r[[i, k]] * x[[k, c]];
            }
            x[[i, c]] = s / r[[i, i]];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn cholesky_recovers_known_solution() {
        let a = array![[c(4.0, 0.0), c(1.0, 1.0)], [c(1.0, -1.0), c(3.0, 0.0)]];
        let x_true = array![[c(1.0, 2.0)], [c(-0.5, 0.25)]];
        let b = a.dot(&x_true);
        let x = cholesky_solve(a.view(), b.view()).unwrap();
        for (u, v) in x.iter().zip(x_true.iter()) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(2.0, 0.0), c(1.0, 0.0)]];
        let b = array![[c(1.0, 0.0)], [c(1.0, 0.0)]];
        assert!(matches!(cholesky_solve(a.view(), b.view()), Err(Error::Singular(_))));
    }

    #[test]
    fn lstsq_matches_normal_equations() {
        let a = array![
            [c(1.0, 0.5), c(0.0, 1.0)],
            [c(2.0, 0.0), c(1.0, -1.0)],
            [c(0.0, -1.0), c(3.0, 0.0)],
            [c(1.0, 1.0), c(0.5, 0.5)]
        ];
        let b = array![[c(1.0, 0.0)], [c(0.0, 1.0)], [c(2.0, -1.0)], [c(0.5, 0.0)]];
        let x = lstsq(a.view(), b.view()).unwrap();
        let ah = herm(a.view());
        let x_ne = cholesky_solve(ah.dot(&a).view(), ah.dot(&b).view()).unwrap();
        for (u, v) in x.iter().zip(x_ne.iter()) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn lstsq_detects_rank_deficiency() {
        let a = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(2.0, 0.0), c(4.0, 0.0)], [c(3.0, 0.0), c(6.0, 0.0)]];
        let b = Array2::<Complex<f64>>::zeros((3, 1));
        assert!(matches!(lstsq(a.view(), b.view()), Err(Error::Singular(_))));
    }
}
