//! Amplitude estimation, threshold oracles for Grover search and the phase
//! oracles `e^{-iγC(θ)}` used by the QAOA driver.

mod ae;
mod ideal;
mod lcu;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use ae::{
    amplitude_estimation, apply_threshold_oracle, inverse_amplitude_estimation, AePhaseOracle,
    GroverOracle,
};
pub use ideal::{IdealPhaseOracle, IdealThresholdOracle};
pub use lcu::{LcuPhaseOracle, LcuSeriesSpec};

use crate::encoders::{AmplitudeEncoding, Direction};
use crate::error::{Error, Result};
use crate::sv::{QubitLayout, Register, StateVector};

/// `⌈log₂(2 + 1/(2ε₁))⌉`, the extra estimation bits that push the failure
/// probability below `ε₁`.
pub fn confidence_bits(eps1: f64) -> usize {
    (2.0 + 1.0 / (2.0 * eps1)).log2().ceil() as usize
}

/// Block `B_{jk} = ⟨0…0, j| op |0…0, k⟩` over parameter configurations, with
/// every other register held at zero.
pub fn parameter_block(
    layout: &Arc<QubitLayout>,
    mut op: impl FnMut(&mut StateVector) -> Result<()>,
) -> Result<DMatrix<Complex64>> {
    let n = 1usize << layout.width(Register::Parameter)?;
    let mut block = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut s = StateVector::basis(layout.clone(), layout.index_of(Register::Parameter, k)?)?;
        op(&mut s)?;
        for j in 0..n {
            block[(j, k)] = s.amplitudes()[layout.index_of(Register::Parameter, j)?];
        }
    }
    Ok(block)
}

/// Largest singular value of `a − b`.
pub fn operator_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).singular_values().max()
}

/// Phase-oracle construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMethod {
    /// Amplitude estimation followed by a diagonal phase and uncomputation.
    Ae,
    /// Truncated series in the Grover walk with oblivious amplitude amplification.
    Lcu,
    /// Classically computed phases on the parameter register.
    Ideal,
}

impl PhaseMethod {
    pub fn name(self) -> &'static str {
        match self {
            PhaseMethod::Ae => "ae",
            PhaseMethod::Lcu => "lcu",
            PhaseMethod::Ideal => "ideal",
        }
    }
}

fn default_eps1() -> f64 {
    0.25
}

fn default_method() -> PhaseMethod {
    PhaseMethod::Ae
}

fn default_gamma() -> f64 {
    1.0
}

fn default_series_order() -> usize {
    8
}

/// Oracle precision settings.
///
/// The amplitude register width is `t = n′ + ⌈log₂(2 + 1/(2ε₁))⌉` with cost
/// precision `ε₂ = 2^{-n′}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OracleConfigRaw", into = "OracleConfigRaw")]
pub struct OracleConfig {
    amplitude_bits: usize,
    eps1: f64,
    pub method: PhaseMethod,
    pub gamma: f64,
    pub series_order: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleConfigRaw {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitude_bits: Option<usize>,
    #[serde(default = "default_eps1")]
    eps1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eps2: Option<f64>,
    #[serde(default = "default_method")]
    method: PhaseMethod,
    #[serde(default = "default_gamma")]
    gamma: f64,
    #[serde(default = "default_series_order")]
    series_order: usize,
}

impl TryFrom<OracleConfigRaw> for OracleConfig {
    type Error = Error;

    fn try_from(raw: OracleConfigRaw) -> Result<Self> {
        let mut cfg = match (raw.amplitude_bits, raw.eps2) {
            (Some(t), None) => OracleConfig::new(t, raw.eps1)?,
            (None, Some(eps2)) => OracleConfig::from_precision(raw.eps1, eps2)?,
            (None, None) => OracleConfig::new(8, raw.eps1)?,
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "give either amplitude_bits or eps2, not both".into(),
                ))
            }
        };
        cfg.method = raw.method;
        cfg = cfg.with_gamma(raw.gamma)?;
        cfg = cfg.with_series_order(raw.series_order)?;
        Ok(cfg)
    }
}

impl From<OracleConfig> for OracleConfigRaw {
    fn from(c: OracleConfig) -> Self {
        OracleConfigRaw {
            amplitude_bits: Some(c.amplitude_bits),
            eps1: c.eps1,
            eps2: None,
            method: c.method,
            gamma: c.gamma,
            series_order: c.series_order,
        }
    }
}

impl OracleConfig {
    /// From the amplitude register width and failure probability.
    pub fn new(amplitude_bits: usize, eps1: f64) -> Result<Self> {
        if !(eps1 > 0.0 && eps1 < 1.0) {
            return Err(Error::InvalidConfig(format!("eps1 = {eps1} must lie in (0, 1)")));
        }
        let extra = confidence_bits(eps1);
        if amplitude_bits <= extra {
            return Err(Error::InvalidConfig(format!(
                "amplitude_bits = {amplitude_bits} leaves no precision bits (need more than {extra} at eps1 = {eps1})"
            )));
        }
        if amplitude_bits > 16 {
            return Err(Error::InvalidConfig(format!(
                "amplitude_bits = {amplitude_bits} exceeds 16"
            )));
        }
        Ok(Self {
            amplitude_bits,
            eps1,
            method: PhaseMethod::Ae,
            gamma: 1.0,
            series_order: default_series_order(),
        })
    }

    /// From target precisions; `n′ = ⌈log₂(1/ε₂)⌉`.
    pub fn from_precision(eps1: f64, eps2: f64) -> Result<Self> {
        if !(eps2 > 0.0 && eps2 < 1.0) {
            return Err(Error::InvalidConfig(format!("eps2 = {eps2} must lie in (0, 1)")));
        }
        if !(eps1 > 0.0 && eps1 < 1.0) {
            return Err(Error::InvalidConfig(format!("eps1 = {eps1} must lie in (0, 1)")));
        }
        let n_prime = (1.0 / eps2).log2().ceil() as usize;
        Self::new(n_prime + confidence_bits(eps1), eps1)
    }

    pub fn with_method(mut self, method: PhaseMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidConfig("gamma must be finite".into()));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_series_order(mut self, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidConfig("series order must be at least 1".into()));
        }
        self.series_order = order;
        Ok(self)
    }

    /// `t`.
    pub fn amplitude_bits(&self) -> usize {
        self.amplitude_bits
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    /// `n′`.
    pub fn precision_bits(&self) -> usize {
        self.amplitude_bits - confidence_bits(self.eps1)
    }

    /// `ε₂ = 2^{-n′}`.
    pub fn eps2(&self) -> f64 {
        (-(self.precision_bits() as f64)).exp2()
    }

    /// Controlled-QNN runs per oracle call, `N₀ = 2(2^{t+1} − 1)`.
    pub fn qnn_runs_per_call(&self) -> u64 {
        2 * ((1u64 << (self.amplitude_bits + 1)) - 1)
    }
}

/// Folded angle estimate `θ̂ = min(φ, 2π − φ)/2` with `φ = 2π·raw/2^t`.
pub fn fold_phase(raw: usize, bits: usize) -> f64 {
    let d = 1usize << bits;
    let raw = raw % d;
    PI * raw.min(d - raw) as f64 / d as f64
}

/// Comparator applied by the threshold oracle on folded estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    /// Flip branches with `θ̂ < θ*`.
    FlipBelow(f64),
    /// Flip branches with `θ̂ > θ*`.
    FlipAbove(f64),
    FlipNone,
    FlipAll,
}

impl ThresholdRule {
    /// Rule flagging configurations whose cost is strictly better than `threshold`.
    pub fn for_cost(enc: &dyn AmplitudeEncoding, direction: Direction, threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::InvalidArgument("threshold not finite".into()));
        }
        let map = enc.cost_map();
        let e_star = map.encoded(threshold);
        // E = −cos 2θ increases with θ, so "E below E*" is "θ below θ*"
        let below = (direction == Direction::Minimize) == (map.scale > 0.0);
        if e_star > 1.0 {
            return Ok(if below { Self::FlipAll } else { Self::FlipNone });
        }
        if e_star < -1.0 {
            return Ok(if below { Self::FlipNone } else { Self::FlipAll });
        }
        let theta = (-e_star).acos() / 2.0;
        let (lo, hi) = enc.theta_range();
        if theta < lo - 1e-12 || theta > hi + 1e-12 {
            return Err(Error::ThresholdOutOfRange(theta));
        }
        Ok(if below {
            Self::FlipBelow(theta)
        } else {
            Self::FlipAbove(theta)
        })
    }

    pub fn flips(&self, theta_hat: f64) -> bool {
        match *self {
            Self::FlipBelow(t) => theta_hat < t - 1e-12,
            Self::FlipAbove(t) => theta_hat > t + 1e-12,
            Self::FlipNone => false,
            Self::FlipAll => true,
        }
    }
}

/// Sign oracle used by Grover search: flips configurations whose cost is
/// strictly better than the threshold.
pub trait ThresholdOracle: Send + Sync {
    fn name(&self) -> &'static str;

    /// Layout of the states the oracle acts on. Contains the parameter register.
    fn layout(&self) -> Arc<QubitLayout>;

    fn apply(&self, state: &mut StateVector, threshold: f64) -> Result<()>;
}

/// Diagnostics of a phase-oracle application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseReport {
    /// Probability that every non-parameter register reads zero afterwards.
    pub ancilla_zero_probability: f64,
}

/// Coherent phase oracle `Σ_θ ω_θ|θ⟩ ↦ Σ_θ e^{-iγC(θ)} ω_θ|θ⟩`.
pub trait PhaseOracle: Send + Sync {
    fn name(&self) -> &'static str;

    fn layout(&self) -> Arc<QubitLayout>;

    fn apply(&self, state: &mut StateVector, gamma: f64) -> Result<PhaseReport>;
}

/// Everything a phase oracle factory may need.
pub struct PhaseOracleInputs<'a> {
    pub encodings: &'a [Arc<dyn AmplitudeEncoding>],
    pub costs: &'a [f64],
    pub config: &'a OracleConfig,
}

type PhaseFactory = fn(&PhaseOracleInputs<'_>) -> Result<Box<dyn PhaseOracle>>;

fn make_ae(i: &PhaseOracleInputs<'_>) -> Result<Box<dyn PhaseOracle>> {
    Ok(Box::new(AePhaseOracle::new(i.encodings.to_vec(), i.config.amplitude_bits())?))
}

fn make_lcu(i: &PhaseOracleInputs<'_>) -> Result<Box<dyn PhaseOracle>> {
    Ok(Box::new(LcuPhaseOracle::new(
        i.encodings.to_vec(),
        LcuSeriesSpec::new(i.config.series_order)?,
    )?))
}

fn make_ideal(i: &PhaseOracleInputs<'_>) -> Result<Box<dyn PhaseOracle>> {
    Ok(Box::new(IdealPhaseOracle::new(i.costs.to_vec())?))
}

const PHASE_ORACLES: &[(&str, PhaseFactory)] =
    &[("ae", make_ae), ("lcu", make_lcu), ("ideal", make_ideal)];

/// Names accepted by [`phase_oracle`].
pub fn phase_oracle_names() -> Vec<&'static str> {
    PHASE_ORACLES.iter().map(|(n, _)| *n).collect()
}

/// Builds the phase oracle registered under `name`.
pub fn phase_oracle(name: &str, inputs: &PhaseOracleInputs<'_>) -> Result<Box<dyn PhaseOracle>> {
    PHASE_ORACLES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown phase oracle '{name}'")))
        .and_then(|(_, f)| f(inputs))
}
