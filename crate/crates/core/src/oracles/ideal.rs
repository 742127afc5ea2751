use std::sync::Arc;

use num_complex::Complex64;

use super::{PhaseOracle, PhaseReport, ThresholdOracle};
use crate::encoders::Direction;
use crate::error::{Error, Result};
use crate::sv::{QubitLayout, Register, StateVector};

fn parameter_layout(len: usize) -> Result<Arc<QubitLayout>> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "cost table of length {len} is not a power of two"
        )));
    }
    Ok(Arc::new(QubitLayout::single(
        Register::Parameter,
        len.trailing_zeros() as usize,
    )))
}

/// Threshold oracle from an enumerated cost table.
#[derive(Debug, Clone)]
pub struct IdealThresholdOracle {
    costs: Vec<f64>,
    direction: Direction,
    layout: Arc<QubitLayout>,
}

impl IdealThresholdOracle {
    pub fn new(costs: Vec<f64>, direction: Direction) -> Result<Self> {
        let layout = parameter_layout(costs.len())?;
        Ok(Self {
            costs,
            direction,
            layout,
        })
    }
}

impl ThresholdOracle for IdealThresholdOracle {
    fn name(&self) -> &'static str {
        "ideal"
    }

    fn layout(&self) -> Arc<QubitLayout> {
        self.layout.clone()
    }

    fn apply(&self, state: &mut StateVector, threshold: f64) -> Result<()> {
        state.apply_register_diagonal(Register::Parameter, |j| {
            if self.direction.better(self.costs[j], threshold) {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }
}

/// `e^{-iγC_j}` from an enumerated cost table.
#[derive(Debug, Clone)]
pub struct IdealPhaseOracle {
    costs: Vec<f64>,
    layout: Arc<QubitLayout>,
}

impl IdealPhaseOracle {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        let layout = parameter_layout(costs.len())?;
        Ok(Self { costs, layout })
    }
}

impl PhaseOracle for IdealPhaseOracle {
    fn name(&self) -> &'static str {
        "ideal"
    }

    fn layout(&self) -> Arc<QubitLayout> {
        self.layout.clone()
    }

    fn apply(&self, state: &mut StateVector, gamma: f64) -> Result<PhaseReport> {
        state.apply_register_diagonal(Register::Parameter, |j| {
            Complex64::from_polar(1.0, -gamma * self.costs[j])
        })?;
        Ok(PhaseReport {
            ancilla_zero_probability: 1.0,
        })
    }
}
