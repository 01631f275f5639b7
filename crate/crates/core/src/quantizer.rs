//! Uniform mid-rise `B`-bit complex quantizer with automatic gain control.
//!
//! Each real dimension is quantized independently. With per-part scale
//! `s` (AGC-scaled stepsize), bin `b` in `1..=2^B` covers
//! `((b - 1 - 2^(B-1)) s, (b - 2^(B-1)) s]`, the outer bins extend to
//! infinity, and the reconstruction level is `(b - 2^(B-1) - 1/2) s`.
//! For positive inputs this is exactly
//! `sign(x) (min(ceil(|x|/s), 2^(B-1)) - 1/2) s`; inputs sitting exactly on
//! a negative threshold, and zero, fall into the lower-indexed bin.

use std::sync::OnceLock;

use ndarray::Array2;
use num_complex::Complex;

use crate::config::{Resolution, MAX_BITS};
use crate::error::{Error, Result};
use crate::gaussian::{pdf, sf};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// Calibrated quantizer.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerSpec<T> {
    pub resolution: Resolution,
    /// Unit-variance stepsize `Delta` (zero for infinite resolution).
    pub base_step: T,
    /// `Delta_Re = sqrt(E[Re^2]) Delta`.
    pub scale_re: T,
    /// `Delta_Im = sqrt(E[Im^2]) Delta`.
    pub scale_im: T,
    /// Normalized thresholds `r_b = (-2^(B-1) + b) Delta`, `b = 1..2^B - 1`.
    pub thresholds: Vec<T>,
    /// Distortion factor `E|Q(x) - x|^2 / E|x|^2` at `base_step`.
    pub eta: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinIndices {
    pub re: Array2<u16>,
    pub im: Array2<u16>,
}

/// Quantizer output together with the bin every entry fell into.
#[derive(Debug, Clone)]
pub struct QuantizedMatrix<T> {
    pub values: Array2<Complex<T>>,
    pub spec: QuantizerSpec<T>,
    /// `None` for infinite resolution.
    pub bins: Option<BinIndices>,
}

fn check_bits(bits: u32) -> Result<()> {
    if (1..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(Error::Config(format!("bit depth {bits} outside 1..={MAX_BITS}")))
    }
}

/// Mean squared error of the mid-rise quantizer with step `delta` on a
/// unit-variance real Gaussian, from closed-form truncated moments.
pub fn gaussian_distortion(bits: u32, delta: f64) -> f64 {
    let half_levels = 1u32 << (bits - 1);
    let mut total = 0.0;
    // positive half; the negative half is its mirror image
    for k in 1..=half_levels {
        let a = (k - 1) as f64 * delta;
        let b = if k == half_levels { f64::INFINITY } else { k as f64 * delta };
        let c = (k as f64 - 0.5) * delta;
        let mass = sf(a) - sf(b);
        let first = pdf(a) - pdf(b);
        let bphi = if b.is_infinite() { 0.0 } else { b * pdf(b) };
        let second = mass + a * pdf(a) - bphi;
        total += c * c * mass - 2.0 * c * first + second;
    }
    2.0 * total
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

fn search_stepsize(bits: u32) -> f64 {
    // log grid to bracket the minimum, then golden-section refinement
    let grid: Vec<f64> = (0..=2000).map(|i| 10f64.powf(-3.0 + 3.7 * i as f64 / 2000.0)).collect();
    let best = (0..grid.len())
        .min_by(|&i, &j| gaussian_distortion(bits, grid[i]).total_cmp(&gaussian_distortion(bits, grid[j])))
        .expect("grid is nonempty");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    golden_min(|d| gaussian_distortion(bits, d), lo, hi, 1e-12)
}

fn stepsize_table() -> &'static [(f64, f64); MAX_BITS as usize] {
    static TABLE: OnceLock<[(f64, f64); MAX_BITS as usize]> = OnceLock::new();
    TABLE.get_or_init(|| {
        std::array::from_fn(|i| {
            let bits = i as u32 + 1;
            let delta = search_stepsize(bits);
            (delta, gaussian_distortion(bits, delta))
        })
    })
}

/// Stepsize minimizing the mean squared error for a unit-variance real
/// Gaussian input.
pub fn optimal_stepsize(bits: u32) -> Result<f64> {
    check_bits(bits)?;
    Ok(stepsize_table()[bits as usize - 1].0)
}

/// Normalized quantization MSE `eta_b` at the optimal stepsize.
pub fn distortion_factor(bits: u32) -> Result<f64> {
    check_bits(bits)?;
    Ok(stepsize_table()[bits as usize - 1].1)
}

impl<T: Real> QuantizerSpec<T> {
    /// AGC calibration on measured samples with an explicit base stepsize.
    pub fn calibrate(resolution: Resolution, base_step: T, samples: &Array2<Complex<T>>) -> Result<Self> {
        resolution.validate()?;
        let Some(bits) = resolution.bits() else {
            return Ok(Self::infinite());
        };
        if samples.is_empty() {
            return Err(Error::Degenerate("AGC calibration needs samples".into()));
        }
        if !(base_step > T::zero()) {
            return Err(Error::Config(format!("stepsize {base_step} must be positive")));
        }
        let n = T::of(samples.len() as f64);
        let p_re = samples.iter().map(|z| z.re * z.re).sum::<T>() / n;
        let p_im = samples.iter().map(|z| z.im * z.im).sum::<T>() / n;
        if !(p_re > T::zero() && p_im > T::zero()) {
            return Err(Error::Degenerate("zero input power on a real dimension".into()));
        }
        let half = 1i64 << (bits - 1);
        let thresholds = (1..2 * half).map(|b| T::of((b - half) as f64) * base_step).collect();
        let eta = T::of(gaussian_distortion(bits, base_step.as_f64()));
        Ok(Self {
            resolution,
            base_step,
            scale_re: p_re.sqrt() * base_step,
            scale_im: p_im.sqrt() * base_step,
            thresholds,
            eta,
        })
    }

    /// AGC calibration at the MSE-optimal stepsize for the bit depth.
    pub fn calibrate_optimal(resolution: Resolution, samples: &Array2<Complex<T>>) -> Result<Self> {
        let step = match resolution.bits() {
            Some(b) => T::of(optimal_stepsize(b)?),
            None => T::zero(),
        };
        Self::calibrate(resolution, step, samples)
    }

    /// Pass-through quantizer with `eta = 0`.
    pub fn infinite() -> Self {
        Self {
            resolution: Resolution::Infinite,
            base_step: T::zero(),
            scale_re: T::one(),
            scale_im: T::one(),
            thresholds: Vec::new(),
            eta: T::zero(),
        }
    }

    pub fn levels_per_dim(&self) -> Option<usize> {
        self.resolution.bits().map(|b| 1usize << b)
    }

    fn half_levels(&self) -> i64 {
        self.resolution.bits().map_or(0, |b| 1i64 << (b - 1))
    }

    pub fn scale(&self, part: Part) -> T {
        match part {
            Part::Re => self.scale_re,
            Part::Im => self.scale_im,
        }
    }

    /// Maps one finite real input to `(level, bin)`; finite resolution only.
    pub fn quantize_real(&self, x: T, part: Part) -> (T, u16) {
        let half = self.half_levels();
        let s = self.scale(part);
        let idx = (x / s).ceil().to_i64().unwrap_or(if x > T::zero() { half } else { 1 - half });
        let bin = idx.clamp(1 - half, half) + half;
        (self.level(bin as u16, part), bin as u16)
    }

    /// Reconstruction level of a bin.
    pub fn level(&self, bin: u16, part: Part) -> T {
        T::of(bin as f64 - self.half_levels() as f64 - 0.5) * self.scale(part)
    }

    /// `(lower, upper]` boundaries of a bin in input units.
    pub fn bin_bounds(&self, bin: u16, part: Part) -> Result<(T, T)> {
        let Some(levels) = self.levels_per_dim() else {
            return Err(Error::Domain("infinite-resolution quantizer has no bins".into()));
        };
        let b = bin as usize;
        if !(1..=levels).contains(&b) {
            return Err(Error::Domain(format!("bin {bin} outside 1..={levels}")));
        }
        let half = self.half_levels() as f64;
        let s = self.scale(part);
        let lower = if b == 1 { T::neg_infinity() } else { T::of(b as f64 - 1.0 - half) * s };
        let upper = if b == levels { T::infinity() } else { T::of(b as f64 - half) * s };
        Ok((lower, upper))
    }

    /// Applies the quantizer entrywise.
    pub fn quantize(&self, y: &Array2<Complex<T>>) -> QuantizedMatrix<T> {
        if self.resolution == Resolution::Infinite {
            return QuantizedMatrix { values: y.clone(), spec: self.clone(), bins: None };
        }
        let mut values = Array2::<Complex<T>>::zeros(y.dim());
        let mut bin_re = Array2::<u16>::zeros(y.dim());
        let mut bin_im = Array2::<u16>::zeros(y.dim());
        for (idx, z) in y.indexed_iter() {
            let (lr, br) = self.quantize_real(z.re, Part::Re);
            let (li, bi) = self.quantize_real(z.im, Part::Im);
            values[idx] = Complex::new(lr, li);
            bin_re[idx] = br;
            bin_im[idx] = bi;
        }
        QuantizedMatrix { values, spec: self.clone(), bins: Some(BinIndices { re: bin_re, im: bin_im }) }
    }
}

/// Calibrates at the optimal stepsize on `y` and quantizes it.
pub fn quantize<T: Real>(y: &Array2<Complex<T>>, resolution: Resolution) -> Result<QuantizedMatrix<T>> {
    Ok(QuantizerSpec::calibrate_optimal(resolution, y)?.quantize(y))
}
