//! Geometric mmWave channels for the user -> RIS -> BS link and the
//! cascaded channel `U = G Diag(h)`.

use ndarray::{Array1, Array2};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Path gains and normalized spatial frequencies of one channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet<T> {
    /// `alpha_l`, RIS -> BS paths.
    pub gains_g: Vec<Complex<T>>,
    /// `beta_j`, user -> RIS paths.
    pub gains_h: Vec<Complex<T>>,
    /// BS-side frequencies of the RIS -> BS paths.
    pub aod_bs: Vec<T>,
    /// RIS-side frequencies of the RIS -> BS paths.
    pub aod_ris: Vec<T>,
    /// RIS-side frequencies of the user -> RIS paths.
    pub aoa_ris: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct ChannelRealization<T> {
    /// RIS -> BS channel, `N x M`.
    pub g: Array2<Complex<T>>,
    /// User -> RIS channel, length `M`.
    pub h: Array1<Complex<T>>,
    /// Cascaded channel `G Diag(h)`, `N x M`.
    pub u: Array2<Complex<T>>,
    pub paths: PathSet<T>,
}

/// ULA response `a_K(f)[k] = exp(j 2 pi f k)` for a normalized spatial
/// frequency `f` in `(0, 1]`.
pub fn steering_vector<T: Real>(n_elems: usize, freq: T) -> Result<Array1<Complex<T>>> {
    if n_elems == 0 {
        return Err(Error::Domain("steering vector needs at least one element".into()));
    }
    if !(freq > T::zero() && freq <= T::one()) {
        return Err(Error::Domain(format!("spatial frequency {freq} outside (0, 1]")));
    }
    Ok(steering_unchecked(n_elems, freq))
}

fn steering_unchecked<T: Real>(n_elems: usize, freq: T) -> Array1<Complex<T>> {
    // Phase is reduced in f64 so that large k*f products keep their accuracy in f32.
    let f = freq.as_f64();
    Array1::from_shape_fn(n_elems, |k| {
        let turns = (f * k as f64).fract();
        let (s, c) = (std::f64::consts::TAU * turns).sin_cos();
        Complex::new(T::of(c), T::of(s))
    })
}

/// Wraps a frequency difference into `(0, 1]`.
fn wrap_unit<T: Real>(x: T) -> T {
    let w = x - x.floor();
    if w <= T::zero() {
        T::one()
    } else {
        w
    }
}

/// Standard circularly-symmetric complex Gaussian draw, `CN(0, 1)`.
pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::of(re * s), T::of(im * s))
}

/// Uniform draw on `(0, 1]`.
pub fn uniform_open_closed<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::of(1.0 - rng.random::<f64>())
}

/// `rows x cols` matrix with i.i.d. `CN(0, var)` entries.
pub fn complex_gaussian_matrix<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    var: T,
    rng: &mut R,
) -> Array2<Complex<T>> {
    let sd = var.sqrt();
    Array2::from_shape_simple_fn((rows, cols), || complex_normal::<T, R>(rng) * sd)
}

pub fn sample_paths<T: Real, R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> PathSet<T> {
    let (l, j) = (cfg.paths_bs_ris, cfg.paths_ris_user);
    let gains_g = (0..l).map(|_| complex_normal(rng)).collect();
    let gains_h = (0..j).map(|_| complex_normal(rng)).collect();
    let aod_bs = (0..l).map(|_| uniform_open_closed(rng)).collect();
    let aod_ris = (0..l).map(|_| uniform_open_closed(rng)).collect();
    let aoa_ris = (0..j).map(|_| uniform_open_closed(rng)).collect();
    PathSet { gains_g, gains_h, aod_bs, aod_ris, aoa_ris }
}

fn check_paths<T: Real>(paths: &PathSet<T>, cfg: &SystemConfig) -> Result<()> {
    let (l, j) = (cfg.paths_bs_ris, cfg.paths_ris_user);
    if paths.gains_g.len() != l || paths.aod_bs.len() != l || paths.aod_ris.len() != l {
        return Err(Error::Config(format!("path set does not carry L = {l} RIS-BS paths")));
    }
    if paths.gains_h.len() != j || paths.aoa_ris.len() != j {
        return Err(Error::Config(format!("path set does not carry J = {j} user-RIS paths")));
    }
    let all_freqs = paths.aod_bs.iter().chain(&paths.aod_ris).chain(&paths.aoa_ris);
    for &f in all_freqs {
        if !(f > T::zero() && f <= T::one()) {
            return Err(Error::Domain(format!("spatial frequency {f} outside (0, 1]")));
        }
    }
    Ok(())
}

/// Builds `G`, `h` and `U = G Diag(h)` from the path parameters.
pub fn build_channels<T: Real>(paths: &PathSet<T>, cfg: &SystemConfig) -> Result<ChannelRealization<T>> {
    check_paths(paths, cfg)?;
    let (n, m) = (cfg.antennas, cfg.ris_elements);
    let mut g = Array2::<Complex<T>>::zeros((n, m));
    for l in 0..paths.gains_g.len() {
        let a_bs = steering_unchecked(n, paths.aod_bs[l]);
        let a_ris = steering_unchecked(m, paths.aod_ris[l]);
        let alpha = paths.gains_g[l];
        for ((r, c), x) in g.indexed_iter_mut() {
            *x += alpha * a_bs[r] * a_ris[c].conj();
        }
    }
    let mut h = Array1::<Complex<T>>::zeros(m);
    for (beta, &psi) in paths.gains_h.iter().zip(&paths.aoa_ris) {
        h.scaled_add(*beta, &steering_unchecked(m, psi));
    }
    let mut u = g.clone();
    for mut row in u.rows_mut() {
        row *= &h;
    }
    Ok(ChannelRealization { g, h, u, paths: paths.clone() })
}

/// The cascaded channel as the double sum over path pairs,
/// `sum_l sum_j alpha_l beta_j a_N(phi_l) a_M(phi~_l - psi_j)^H`.
pub fn cascaded_from_paths<T: Real>(paths: &PathSet<T>, cfg: &SystemConfig) -> Result<Array2<Complex<T>>> {
    check_paths(paths, cfg)?;
    let (n, m) = (cfg.antennas, cfg.ris_elements);
    let mut u = Array2::<Complex<T>>::zeros((n, m));
    for l in 0..paths.gains_g.len() {
        let a_bs = steering_unchecked(n, paths.aod_bs[l]);
        for j in 0..paths.gains_h.len() {
            let diff = wrap_unit(paths.aod_ris[l] - paths.aoa_ris[j]);
            let a_ris = steering_unchecked(m, diff);
            let w = paths.gains_g[l] * paths.gains_h[j];
            for ((r, c), x) in u.indexed_iter_mut() {
                *x += w * a_bs[r] * a_ris[c].conj();
            }
        }
    }
    Ok(u)
}
