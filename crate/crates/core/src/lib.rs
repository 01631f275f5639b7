//! Cascaded channel estimation for an RIS-aided mmWave massive-MIMO uplink
//! observed through few-bit ADCs.
//!
//! The crate provides the geometric channel model, the AGC mid-rise
//! quantizer, Zadoff-Chu training, a BiG-AMP estimator with the
//! quantized-Gaussian Bayesian denoiser, the LS and ALMMSE baselines, and a
//! seeded Monte-Carlo harness. Numerical code is generic over [`Real`]
//! (`f32` or `f64`); the aliases below pin the common `f64` instantiations.

// `!(x > 0)` is used deliberately so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bigamp;
pub mod channel;
pub mod config;
pub mod denoise;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod linalg;
pub mod quantizer;
pub mod scalar;
pub mod training;

pub use config::{AmpOptions, Estimator, PriorRule, Resolution, SnrCalibration, SystemConfig};
pub use error::{Error, Result};
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;

pub type PathSet64 = channel::PathSet<f64>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type QuantizerSpec64 = quantizer::QuantizerSpec<f64>;
pub type QuantizedMatrix64 = quantizer::QuantizedMatrix<f64>;
pub type TrainingMatrix64 = training::TrainingMatrix<f64>;
pub type AmpState64 = bigamp::AmpState<f64>;
pub type AmpReport64 = bigamp::AmpReport<f64>;
pub type BussgangModel64 = baselines::BussgangModel<f64>;

pub type PathSet32 = channel::PathSet<f32>;
pub type ChannelRealization32 = channel::ChannelRealization<f32>;
pub type QuantizerSpec32 = quantizer::QuantizerSpec<f32>;
pub type QuantizedMatrix32 = quantizer::QuantizedMatrix<f32>;
pub type TrainingMatrix32 = training::TrainingMatrix<f32>;
pub type AmpState32 = bigamp::AmpState<f32>;
pub type AmpReport32 = bigamp::AmpReport<f32>;
pub type BussgangModel32 = baselines::BussgangModel<f32>;
