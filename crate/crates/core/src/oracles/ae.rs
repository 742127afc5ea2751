use std::sync::Arc;

use num_complex::Complex64;

use super::{fold_phase, PhaseOracle, PhaseReport, ThresholdOracle, ThresholdRule};
use crate::encoders::{
    apply_grover_power, encoding_layout, AmplitudeEncoding, Direction, GroverVariant,
};
use crate::error::{Error, Result};
use crate::sv::{Control, GateOp, QubitLayout, Register, StateVector};

/// Phase estimation of `G` into the amplitude register. The encoding `U` must
/// already have been applied.
///
/// Amplitude bit `k` (weight `2^k`) controls `G^{2^k}`; the register is then
/// transformed by `F_d`, leaving `raw ≈ 2^t·φ/2π` for each eigenphase `φ`.
pub fn amplitude_estimation(state: &mut StateVector, enc: &dyn AmplitudeEncoding) -> Result<()> {
    let range = state.layout().range(Register::Amplitude)?;
    if range.is_empty() {
        return Err(Error::InvalidArgument("amplitude register is empty".into()));
    }
    state.hadamard_register(Register::Amplitude)?;
    for (k, q) in range.clone().enumerate() {
        apply_grover_power(state, enc, GroverVariant::G, 1 << k, &[Control::on(q)])?;
    }
    state.apply_qft(Register::Amplitude, false)
}

/// Exact inverse of [`amplitude_estimation`].
pub fn inverse_amplitude_estimation(
    state: &mut StateVector,
    enc: &dyn AmplitudeEncoding,
) -> Result<()> {
    let range = state.layout().range(Register::Amplitude)?;
    if range.is_empty() {
        return Err(Error::InvalidArgument("amplitude register is empty".into()));
    }
    state.apply_qft(Register::Amplitude, true)?;
    for (k, q) in range.clone().enumerate().rev() {
        apply_grover_power(state, enc, GroverVariant::G, -(1i64 << k), &[Control::on(q)])?;
    }
    state.hadamard_register(Register::Amplitude)
}

/// Sign flip of the amplitude-register branches selected by `rule`.
pub fn apply_threshold_oracle(state: &mut StateVector, rule: ThresholdRule) -> Result<()> {
    match rule {
        ThresholdRule::FlipNone => Ok(()),
        ThresholdRule::FlipAll => state.apply(&GateOp::phase(std::f64::consts::PI)),
        _ => {
            let t = state.layout().width(Register::Amplitude)?;
            state.apply_register_diagonal(Register::Amplitude, |raw| {
                if rule.flips(fold_phase(raw, t)) {
                    Complex64::new(-1.0, 0.0)
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
        }
    }
}

fn non_parameter_registers(layout: &QubitLayout) -> Vec<Register> {
    layout
        .registers()
        .map(|(r, _)| r)
        .filter(|r| *r != Register::Parameter)
        .collect()
}

/// encode → estimate → threshold → uncompute.
#[derive(Debug, Clone)]
pub struct GroverOracle {
    encoding: Arc<dyn AmplitudeEncoding>,
    direction: Direction,
    layout: Arc<QubitLayout>,
}

impl GroverOracle {
    pub fn new(
        encoding: Arc<dyn AmplitudeEncoding>,
        direction: Direction,
        amplitude_bits: usize,
    ) -> Result<Self> {
        let layout = encoding_layout(encoding.as_ref(), amplitude_bits, &[])?;
        Ok(Self {
            encoding,
            direction,
            layout,
        })
    }

    pub fn rule(&self, threshold: f64) -> Result<ThresholdRule> {
        ThresholdRule::for_cost(self.encoding.as_ref(), self.direction, threshold)
    }

    /// Runs the full pipeline with an explicit comparator.
    pub fn apply_rule(&self, state: &mut StateVector, rule: ThresholdRule) -> Result<()> {
        match rule {
            ThresholdRule::FlipNone | ThresholdRule::FlipAll => apply_threshold_oracle(state, rule),
            _ => {
                let enc = self.encoding.as_ref();
                enc.prepare(state, false, &[])?;
                amplitude_estimation(state, enc)?;
                apply_threshold_oracle(state, rule)?;
                inverse_amplitude_estimation(state, enc)?;
                enc.prepare(state, true, &[])
            }
        }
    }

    /// Probability that all registers other than the parameter register read zero.
    pub fn ancilla_zero_probability(&self, state: &StateVector) -> f64 {
        state.zero_probability(&non_parameter_registers(&self.layout))
    }
}

impl ThresholdOracle for GroverOracle {
    fn name(&self) -> &'static str {
        "ae"
    }

    fn layout(&self) -> Arc<QubitLayout> {
        self.layout.clone()
    }

    fn apply(&self, state: &mut StateVector, threshold: f64) -> Result<()> {
        let rule = self.rule(threshold)?;
        self.apply_rule(state, rule)
    }
}

/// Phase oracle through amplitude estimation. With several encodings (one per
/// training sample) the per-encoding phases are accumulated in sequence, each
/// one fully uncomputed before the next.
#[derive(Debug, Clone)]
pub struct AePhaseOracle {
    encodings: Vec<Arc<dyn AmplitudeEncoding>>,
    layout: Arc<QubitLayout>,
}

impl AePhaseOracle {
    pub fn new(encodings: Vec<Arc<dyn AmplitudeEncoding>>, amplitude_bits: usize) -> Result<Self> {
        let first = encodings
            .first()
            .ok_or_else(|| Error::InvalidArgument("no encodings".into()))?;
        if encodings
            .iter()
            .any(|e| e.work_registers() != first.work_registers() || e.grid() != first.grid())
        {
            return Err(Error::InvalidArgument(
                "encodings must share work registers and grid".into(),
            ));
        }
        let layout = encoding_layout(first.as_ref(), amplitude_bits, &[])?;
        Ok(Self { encodings, layout })
    }
}

impl PhaseOracle for AePhaseOracle {
    fn name(&self) -> &'static str {
        "ae"
    }

    fn layout(&self) -> Arc<QubitLayout> {
        self.layout.clone()
    }

    fn apply(&self, state: &mut StateVector, gamma: f64) -> Result<PhaseReport> {
        if gamma != 0.0 {
            let t = self.layout.width(Register::Amplitude)?;
            for enc in &self.encodings {
                let enc = enc.as_ref();
                let map = enc.cost_map();
                enc.prepare(state, false, &[])?;
                amplitude_estimation(state, enc)?;
                state.apply_register_diagonal(Register::Amplitude, |raw| {
                    let theta = fold_phase(raw, t);
                    let cost = map.cost(-(2.0 * theta).cos());
                    Complex64::from_polar(1.0, -gamma * cost)
                })?;
                inverse_amplitude_estimation(state, enc)?;
                enc.prepare(state, true, &[])?;
            }
        }
        Ok(PhaseReport {
            ancilla_zero_probability: state.zero_probability(&non_parameter_registers(&self.layout)),
        })
    }
}
