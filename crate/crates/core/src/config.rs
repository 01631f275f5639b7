//! Scenario configuration and its flat key-value file form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest finite ADC resolution supported.
pub const MAX_BITS: u32 = 8;

/// ADC resolution per real dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resolution {
    Bits(u32),
    /// Pass-through "infinite resolution" converter.
    Infinite,
}

impl Resolution {
    pub fn bits(self) -> Option<u32> {
        match self {
            Resolution::Bits(b) => Some(b),
            Resolution::Infinite => None,
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Resolution::Bits(b) if !(1..=MAX_BITS).contains(&b) => {
                Err(Error::Config(format!("bit depth {b} outside 1..={MAX_BITS}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Bits(b) => write!(f, "{b}"),
            Resolution::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(Resolution::Infinite),
            t => {
                let b: u32 = t.parse().map_err(|_| Error::Config(format!("invalid bit depth `{s}`")))?;
                let r = Resolution::Bits(b);
                r.validate()?;
                Ok(r)
            }
        }
    }
}

impl Serialize for Resolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Resolution::Bits(b) => s.serialize_u32(*b),
            Resolution::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Resolution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u32),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Int(b) => {
                let r = Resolution::Bits(b);
                r.validate().map(|_| r)
            }
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    BigAmp,
    Ls,
    Almmse,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::BigAmp, Estimator::Ls, Estimator::Almmse];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::BigAmp => "bigamp",
            Estimator::Ls => "ls",
            Estimator::Almmse => "almmse",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bigamp" | "big-amp" => Ok(Estimator::BigAmp),
            "ls" => Ok(Estimator::Ls),
            "almmse" => Ok(Estimator::Almmse),
            other => Err(Error::Config(format!("unknown estimator `{other}`"))),
        }
    }
}

/// How the Gaussian prior variance of the cascaded-channel entries is
/// formed from the two link variances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorRule {
    /// `sigma_g^2 * sigma_h^2`, the second moment of a product of
    /// independent zero-mean entries.
    #[default]
    Product,
    /// `sigma_g^2 sigma_h^2 / (sigma_g^2 + sigma_h^2)`.
    Harmonic,
}

/// Which estimate of `E ||Z||_F^2` sets the noise power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrCalibration {
    /// Realized `||U E||_F^2` of each trial.
    #[default]
    PerTrial,
    /// Model expectation `N tau M sigma_u^2` (unit-modulus training).
    Ensemble,
}

/// BiG-AMP iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmpOptions {
    pub max_iter: usize,
    pub damping: f64,
    pub stop_tol: f64,
}

impl Default for AmpOptions {
    fn default() -> Self {
        Self { max_iter: 100, damping: 0.7, stop_tol: 1e-6 }
    }
}

impl AmpOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!("damping {} outside (0, 1]", self.damping)));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::Config(format!("stop_tol {} must be >= 0", self.stop_tol)));
        }
        Ok(())
    }
}

/// Every scenario dimension and statistic of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    /// BS antennas `N`.
    pub antennas: usize,
    /// RIS elements `M`.
    pub ris_elements: usize,
    /// Training length `tau`.
    pub training_len: usize,
    /// RIS -> BS paths `L`.
    pub paths_bs_ris: usize,
    /// User -> RIS paths `J`.
    pub paths_ris_user: usize,
    pub resolution: Resolution,
    pub snr_db: f64,
    /// Per-entry variance of `G`; defaults to `L` (unit-variance path gains).
    pub sigma_g2: Option<f64>,
    /// Per-entry variance of `h`; defaults to `J`.
    pub sigma_h2: Option<f64>,
    pub prior_rule: PriorRule,
    pub snr_calibration: SnrCalibration,
    pub trials: usize,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    pub amp: AmpOptions,
    pub zc_root: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            antennas: 64,
            ris_elements: 32,
            training_len: 500,
            paths_bs_ris: 10,
            paths_ris_user: 10,
            resolution: Resolution::Bits(3),
            snr_db: 10.0,
            sigma_g2: None,
            sigma_h2: None,
            prior_rule: PriorRule::Product,
            snr_calibration: SnrCalibration::PerTrial,
            trials: 100,
            seed: 1,
            estimators: Estimator::ALL.to_vec(),
            amp: AmpOptions::default(),
            zc_root: 1,
        }
    }
}

impl SystemConfig {
    pub fn sigma_g2(&self) -> f64 {
        self.sigma_g2.unwrap_or(self.paths_bs_ris as f64)
    }

    pub fn sigma_h2(&self) -> f64 {
        self.sigma_h2.unwrap_or(self.paths_ris_user as f64)
    }

    /// Prior variance `sigma_u^2` of one cascaded-channel entry.
    pub fn prior_var(&self) -> f64 {
        let (g, h) = (self.sigma_g2(), self.sigma_h2());
        match self.prior_rule {
            PriorRule::Product => g * h,
            PriorRule::Harmonic => g * h / (g + h),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("antennas", self.antennas),
            ("ris_elements", self.ris_elements),
            ("training_len", self.training_len),
            ("paths_bs_ris", self.paths_bs_ris),
            ("paths_ris_user", self.paths_ris_user),
            ("trials", self.trials),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.training_len < self.ris_elements {
            return Err(Error::Config(format!(
                "training length {} shorter than RIS size {}",
                self.training_len, self.ris_elements
            )));
        }
        if self.estimators.contains(&Estimator::BigAmp) && self.antennas <= self.ris_elements {
            return Err(Error::Config(format!(
                "BiG-AMP needs a tall cascaded channel (N = {} > M = {})",
                self.antennas, self.ris_elements
            )));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimator selected".into()));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::Config("snr_db must be finite".into()));
        }
        for (name, v) in [("sigma_g2", self.sigma_g2), ("sigma_h2", self.sigma_h2)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{name} must be positive and finite")));
                }
            }
        }
        if self.zc_root == 0 {
            return Err(Error::Config("zc_root must be positive".into()));
        }
        self.resolution.validate()?;
        self.amp.validate()
    }

    /// Applies a flat key-value document on top of `self`.
    pub fn apply_file(&mut self, file: ConfigFile) -> Result<()> {
        macro_rules! set {
            ($($src:ident => $dst:expr),* $(,)?) => {
                $(if let Some(v) = file.$src { $dst = v; })*
            };
        }
        set! {
            n => self.antennas,
            m => self.ris_elements,
            tau => self.training_len,
            l => self.paths_bs_ris,
            j => self.paths_ris_user,
            bits => self.resolution,
            snr_db => self.snr_db,
            prior_rule => self.prior_rule,
            snr_calibration => self.snr_calibration,
            trials => self.trials,
            seed => self.seed,
            i_max => self.amp.max_iter,
            damping => self.amp.damping,
            stop_tol => self.amp.stop_tol,
            zc_root => self.zc_root,
        }
        if file.sigma_g2.is_some() {
            self.sigma_g2 = file.sigma_g2;
        }
        if file.sigma_h2.is_some() {
            self.sigma_h2 = file.sigma_h2;
        }
        if let Some(list) = file.estimators {
            self.estimators = list.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        Ok(())
    }

    /// Reads a TOML config document; unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = SystemConfig::default();
        cfg.apply_file(file)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Flat on-disk form of [`SystemConfig`]; every key is optional and
/// overrides the default.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub tau: Option<usize>,
    pub l: Option<usize>,
    pub j: Option<usize>,
    pub bits: Option<Resolution>,
    pub snr_db: Option<f64>,
    pub sigma_g2: Option<f64>,
    pub sigma_h2: Option<f64>,
    pub prior_rule: Option<PriorRule>,
    pub snr_calibration: Option<SnrCalibration>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub estimators: Option<Vec<String>>,
    pub i_max: Option<usize>,
    pub damping: Option<f64>,
    pub stop_tol: Option<f64>,
    pub zc_root: Option<u64>,
}
