use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{almmse_estimate, ls_estimate, BussgangModel};
use crate::bigamp::BigAmp;
use crate::channel::{build_channels, complex_normal, sample_paths};
use crate::config::{Estimator, Resolution, SnrCalibration, SystemConfig};
use crate::error::{Error, Result};
use crate::harness::metrics::{calibrate_noise, ensemble_noise, nmse};
use crate::linalg::frobenius_sqr;
use crate::quantizer::QuantizerSpec;
use crate::scalar::Real;
use crate::training::TrainingMatrix;

/// Halvings of the damping factor tried after a numerical failure.
pub const MAX_RESTARTS: usize = 3;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Record the per-iteration BiG-AMP trace of every trial.
    pub trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub residual: f64,
    pub nmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    /// NMSE of every estimator that produced a finite estimate.
    pub nmse: BTreeMap<Estimator, f64>,
    /// Estimators that failed on this trial, with the reason.
    pub failures: BTreeMap<Estimator, String>,
    pub amp_iterations: usize,
    pub amp_restarts: usize,
    /// BiG-AMP failed even after all damping restarts.
    pub diverged: bool,
    pub op_count: u64,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub axis_value: String,
    pub estimator: Estimator,
    pub mean_nmse: f64,
    pub median_nmse: f64,
    pub stderr: f64,
    pub trials_ok: usize,
    pub trials_diverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub axis_value: String,
    pub trials: Vec<TrialResult>,
    pub summary: Vec<AggregateRow>,
}

/// Axis label written by single runs.
pub const NO_AXIS: &str = "-";

/// Independent random streams of one trial: paths and noise.
fn trial_rngs(seed: u64, trial: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut paths = ChaCha8Rng::seed_from_u64(seed);
    paths.set_stream(2 * trial as u64);
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    noise.set_stream(2 * trial as u64 + 1);
    (paths, noise)
}

/// Unit-variance complex noise drawn column by column, so a shorter
/// training length sees a prefix of the same draws.
fn standard_noise<T: Real>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<Complex<T>> {
    let mut w = Array2::<Complex<T>>::zeros((rows, cols));
    for c in 0..cols {
        for r in 0..rows {
            w[[r, c]] = complex_normal(rng);
        }
    }
    w
}

struct AmpOutcome<T> {
    u_hat: Array2<Complex<T>>,
    iterations: usize,
    trace: Vec<TracePoint>,
}

fn run_bigamp<T: Real>(
    cfg: &SystemConfig,
    amp: &BigAmp<'_, T>,
    truth: &Array2<Complex<T>>,
    trace: bool,
) -> (Result<AmpOutcome<T>>, usize, u64) {
    let mut opts = cfg.amp;
    let mut ops = 0u64;
    let mut last_err = Error::Numerical { iteration: 0, reason: "not run".into() };
    for restart in 0..=MAX_RESTARTS {
        let mut errors = Vec::new();
        let result = amp.run(&opts, |state| {
            if trace {
                errors.push(nmse(&state.u_hat, truth).map(|v| v.as_f64()).unwrap_or(f64::NAN));
            }
        });
        match result {
            Ok(report) if report.u_hat_final.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
                let trace = report
                    .per_iteration_residual
                    .iter()
                    .zip(&errors)
                    .enumerate()
                    .map(|(i, (r, e))| TracePoint { iteration: i + 1, residual: r.as_f64(), nmse: *e })
                    .collect();
                ops += report.op_count;
                let outcome = AmpOutcome {
                    u_hat: report.u_hat_final,
                    iterations: report.iterations_run,
                    trace,
                };
                return (Ok(outcome), restart, ops);
            }
            Ok(_) => last_err = Error::Numerical { iteration: opts.max_iter, reason: "non-finite estimate".into() },
            Err(e @ Error::Numerical { .. }) => last_err = e,
            Err(e) => return (Err(e), restart, ops),
        }
        opts.damping *= 0.5;
    }
    (Err(last_err), MAX_RESTARTS, ops)
}

/// Everything shared by the trials of one experiment.
struct Setup<T> {
    training: TrainingMatrix<T>,
    prior_var: T,
    /// Model variance of one entry of the true cascaded channel.
    entry_var: f64,
}

fn run_trial_with<T: Real>(cfg: &SystemConfig, setup: &Setup<T>, trial: usize, trace: bool) -> Result<TrialResult> {
    let (mut path_rng, mut noise_rng) = trial_rngs(cfg.seed, trial);
    let paths = sample_paths::<T, _>(cfg, &mut path_rng);
    let channels = build_channels(&paths, cfg)?;
    let u = &channels.u;
    let training = &setup.training;

    let noise_var = match cfg.snr_calibration {
        SnrCalibration::PerTrial => calibrate_noise(u, training, cfg.snr_db)?,
        SnrCalibration::Ensemble => ensemble_noise(setup.entry_var, training, cfg.snr_db),
    };
    let z = u.dot(&training.e);
    let w = standard_noise::<T>(cfg.antennas, cfg.training_len, &mut noise_rng);
    let y = &z + &w.mapv(|x| x * noise_var.sqrt());

    // AGC sees the noisy analog signal, as a receiver would
    let spec = QuantizerSpec::calibrate_optimal(cfg.resolution, &y)?;
    let obs = spec.quantize(&y);

    let mut result = TrialResult {
        trial,
        seed: cfg.seed,
        nmse: BTreeMap::new(),
        failures: BTreeMap::new(),
        amp_iterations: 0,
        amp_restarts: 0,
        diverged: false,
        op_count: 0,
        trace: Vec::new(),
    };
    let record = |est: Estimator, estimate: Result<Array2<Complex<T>>>, result: &mut TrialResult| {
        match estimate.and_then(|u_hat| nmse(&u_hat, u)) {
            Ok(v) if v.as_f64().is_finite() => {
                result.nmse.insert(est, v.as_f64());
            }
            Ok(v) => {
                result.failures.insert(est, format!("non-finite NMSE {v}"));
            }
            Err(e) => {
                result.failures.insert(est, e.to_string());
            }
        }
    };

    for &est in &cfg.estimators {
        match est {
            Estimator::BigAmp => {
                let amp = BigAmp::new(&obs, training, noise_var, setup.prior_var)?;
                let (outcome, restarts, ops) = run_bigamp(cfg, &amp, u, trace);
                result.amp_restarts = restarts;
                result.op_count = ops;
                let estimate = outcome.map(|o| {
                    result.amp_iterations = o.iterations;
                    result.trace = o.trace;
                    o.u_hat
                });
                record(est, estimate, &mut result);
                result.diverged = !result.nmse.contains_key(&est);
            }
            Estimator::Ls => record(est, ls_estimate(&obs.values, training), &mut result),
            Estimator::Almmse => {
                let signal_power = frobenius_sqr(z.view()) / T::of(z.len() as f64);
                let estimate = BussgangModel::new(spec.eta, noise_var, signal_power).and_then(|model| {
                    almmse_estimate(&obs.values, training, &model, noise_var, setup.prior_var, cfg.antennas)
                });
                record(est, estimate, &mut result);
            }
        }
    }
    Ok(result)
}

fn setup<T: Real>(cfg: &SystemConfig) -> Result<Setup<T>> {
    cfg.validate()?;
    Ok(Setup {
        training: TrainingMatrix::build(cfg.ris_elements, cfg.training_len, cfg.zc_root)?,
        prior_var: T::of(cfg.prior_var()),
        entry_var: (cfg.paths_bs_ris * cfg.paths_ris_user) as f64,
    })
}

/// Runs trial `trial` of the experiment described by `cfg`.
pub fn run_trial<T: Real>(cfg: &SystemConfig, trial: usize, trace: bool) -> Result<TrialResult> {
    run_trial_with(cfg, &setup::<T>(cfg)?, trial, trace)
}

/// Per-estimator mean, median and standard error over the trials on
/// which the estimator succeeded.
pub fn aggregate(axis_value: &str, estimators: &[Estimator], trials: &[TrialResult]) -> Vec<AggregateRow> {
    estimators
        .iter()
        .map(|&est| {
            let values: Vec<f64> = trials.iter().filter_map(|t| t.nmse.get(&est).copied()).collect();
            let (mean_nmse, median_nmse, stderr) = super::metrics::summarize(&values);
            AggregateRow {
                axis_value: axis_value.to_string(),
                estimator: est,
                mean_nmse,
                median_nmse,
                stderr,
                trials_ok: values.len(),
                trials_diverged: trials.len() - values.len(),
            }
        })
        .collect()
}

fn run_labeled<T: Real>(cfg: &SystemConfig, opts: RunOptions, axis_value: &str) -> Result<ExperimentOutput> {
    let setup = setup::<T>(cfg)?;
    let job = || -> Result<Vec<TrialResult>> {
        (0..cfg.trials).into_par_iter().map(|k| run_trial_with(cfg, &setup, k, opts.trace)).collect()
    };
    let trials = match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(job)?,
        None => job()?,
    };
    let summary = aggregate(axis_value, &cfg.estimators, &trials);
    Ok(ExperimentOutput { axis_value: axis_value.to_string(), trials, summary })
}

/// Runs all trials of `cfg`. Results are ordered by trial index and do not
/// depend on the worker count.
pub fn run_experiment<T: Real>(cfg: &SystemConfig, opts: RunOptions) -> Result<ExperimentOutput> {
    run_labeled::<T>(cfg, opts, NO_AXIS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    SnrDb,
    Bits,
    Tau,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::Bits => "bits",
            Axis::Tau => "tau",
        }
    }

    /// File stem of the plot data for the matching figure.
    pub fn plot_stem(self) -> &'static str {
        match self {
            Axis::SnrDb => "fig1_nmse_vs_snr",
            Axis::Bits => "fig2_nmse_vs_bits",
            Axis::Tau => "fig3_nmse_vs_tau",
        }
    }

    pub fn parse_value(self, text: &str) -> Result<AxisValue> {
        let text = text.trim();
        let bad = |e: &dyn fmt::Display| Error::Config(format!("bad {} value `{text}`: {e}", self.name()));
        match self {
            Axis::SnrDb => text.parse::<f64>().map(AxisValue::SnrDb).map_err(|e| bad(&e)),
            Axis::Bits => text.parse::<Resolution>().map(AxisValue::Bits),
            Axis::Tau => text.parse::<usize>().map(AxisValue::Tau).map_err(|e| bad(&e)),
        }
    }

    /// Parses a comma-separated list of values.
    pub fn parse_values(self, text: &str) -> Result<Vec<AxisValue>> {
        text.split(',').filter(|s| !s.trim().is_empty()).map(|s| self.parse_value(s)).collect()
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "snr" | "snr_db" | "snr-db" => Ok(Axis::SnrDb),
            "bits" | "resolution" => Ok(Axis::Bits),
            "tau" | "training_len" => Ok(Axis::Tau),
            other => Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    SnrDb(f64),
    Bits(Resolution),
    Tau(usize),
}

impl AxisValue {
    pub fn axis(self) -> Axis {
        match self {
            AxisValue::SnrDb(_) => Axis::SnrDb,
            AxisValue::Bits(_) => Axis::Bits,
            AxisValue::Tau(_) => Axis::Tau,
        }
    }

    pub fn apply(self, cfg: &mut SystemConfig) {
        match self {
            AxisValue::SnrDb(v) => cfg.snr_db = v,
            AxisValue::Bits(r) => cfg.resolution = r,
            AxisValue::Tau(t) => cfg.training_len = t,
        }
    }
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::SnrDb(v) => write!(f, "{v}"),
            AxisValue::Bits(r) => write!(f, "{r}"),
            AxisValue::Tau(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub axis: Axis,
    pub points: Vec<ExperimentOutput>,
}

impl SweepOutput {
    pub fn summary(&self) -> Vec<AggregateRow> {
        self.points.iter().flat_map(|p| p.summary.iter().cloned()).collect()
    }
}

/// Runs `base` once per axis value. Trial `k` uses the same random streams
/// at every value, so path sets are common across the sweep.
pub fn run_sweep<T: Real>(base: &SystemConfig, axis: Axis, values: &[AxisValue], opts: RunOptions) -> Result<SweepOutput> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        if value.axis() != axis {
            return Err(Error::Config(format!("value {value} does not belong to the {axis} axis")));
        }
        let mut cfg = base.clone();
        value.apply(&mut cfg);
        points.push(run_labeled::<T>(&cfg, opts, &value.to_string())?);
    }
    Ok(SweepOutput { axis, points })
}
