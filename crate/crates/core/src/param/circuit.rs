use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sv::{
    operator_matrix, Axis, Control, FixedGate, GateOp, QubitLayout, Register, StateVector,
    UnitaryMatrix,
};

/// One entry of a circuit description.
///
/// Qubit indices are local to the circuit; local qubit 0 is the most
/// significant qubit of the register the circuit is placed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CircuitGate {
    Fixed {
        gate: FixedGate,
        target: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        controls: Vec<usize>,
    },
    Rotation {
        axis: Axis,
        angle: f64,
        target: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        controls: Vec<usize>,
    },
    /// Rotation by the trainable angle `θ_param`.
    Param {
        axis: Axis,
        target: usize,
        param: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        controls: Vec<usize>,
    },
    Unitary {
        targets: Vec<usize>,
        matrix: UnitaryMatrix,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        controls: Vec<usize>,
    },
    GlobalPhase {
        angle: f64,
    },
}

impl CircuitGate {
    fn qubits(&self) -> Vec<usize> {
        match self {
            CircuitGate::Fixed { target, controls, .. }
            | CircuitGate::Rotation { target, controls, .. }
            | CircuitGate::Param { target, controls, .. } => {
                std::iter::once(*target).chain(controls.iter().copied()).collect()
            }
            CircuitGate::Unitary {
                targets, controls, ..
            } => targets.iter().chain(controls).copied().collect(),
            CircuitGate::GlobalPhase { .. } => Vec::new(),
        }
    }
}

/// Gate list on `qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circuit {
    pub qubits: usize,
    #[serde(default)]
    pub gates: Vec<CircuitGate>,
}

impl Circuit {
    pub fn new(qubits: usize) -> Self {
        Self {
            qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(mut self, gate: CircuitGate) -> Self {
        self.gates.push(gate);
        self
    }

    pub fn fixed(self, gate: FixedGate, target: usize) -> Self {
        self.push(CircuitGate::Fixed {
            gate,
            target,
            controls: Vec::new(),
        })
    }

    pub fn rotation(self, axis: Axis, angle: f64, target: usize) -> Self {
        self.push(CircuitGate::Rotation {
            axis,
            angle,
            target,
            controls: Vec::new(),
        })
    }

    pub fn param(self, axis: Axis, target: usize, param: usize) -> Self {
        self.push(CircuitGate::Param {
            axis,
            target,
            param,
            controls: Vec::new(),
        })
    }

    pub fn controlled_fixed(self, gate: FixedGate, control: usize, target: usize) -> Self {
        self.push(CircuitGate::Fixed {
            gate,
            target,
            controls: vec![control],
        })
    }

    pub fn unitary(self, targets: Vec<usize>, matrix: UnitaryMatrix) -> Self {
        self.push(CircuitGate::Unitary {
            targets,
            matrix,
            controls: Vec::new(),
        })
    }

    pub fn global_phase(self, angle: f64) -> Self {
        self.push(CircuitGate::GlobalPhase { angle })
    }

    /// Number of trainable parameters referenced (highest index + 1).
    pub fn num_params(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|g| match g {
                CircuitGate::Param { param, .. } => Some(param + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn is_fixed(&self) -> bool {
        self.num_params() == 0
    }

    /// Fixed circuit with every trainable rotation replaced by its bound angle.
    pub fn bind(&self, angles: &[f64]) -> Result<Circuit> {
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                CircuitGate::Param {
                    axis,
                    target,
                    param,
                    controls,
                } => angles
                    .get(*param)
                    .map(|&angle| CircuitGate::Rotation {
                        axis: *axis,
                        angle,
                        target: *target,
                        controls: controls.clone(),
                    })
                    .ok_or_else(|| Error::InvalidCircuit(format!("no value for parameter {param}"))),
                other => Ok(other.clone()),
            })
            .collect::<Result<_>>()?;
        Ok(Circuit {
            qubits: self.qubits,
            gates,
        })
    }

    /// Structural checks: qubit indices, disjoint targets/controls, matrix sizes.
    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            let qs = g.qubits();
            for (a, &q) in qs.iter().enumerate() {
                if q >= self.qubits {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {i}: qubit {q} out of range for {} qubits",
                        self.qubits
                    )));
                }
                if qs[..a].contains(&q) {
                    return Err(Error::InvalidCircuit(format!("gate {i}: qubit {q} repeated")));
                }
            }
            match g {
                CircuitGate::Unitary {
                    targets, matrix, ..
                } if matrix.dim() != 1 << targets.len() => {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {i}: matrix of dimension {} on {} targets",
                        matrix.dim(),
                        targets.len()
                    )));
                }
                CircuitGate::Rotation { angle, .. } | CircuitGate::GlobalPhase { angle }
                    if !angle.is_finite() =>
                {
                    return Err(Error::InvalidCircuit(format!("gate {i}: angle not finite")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Checks the circuit as an ansatz over `params` parameters: every index
    /// below `params` and each used at least once.
    pub fn validate_ansatz(&self, params: usize) -> Result<()> {
        self.validate()?;
        let mut used = vec![false; params];
        for g in &self.gates {
            if let CircuitGate::Param { param, .. } = g {
                if *param >= params {
                    return Err(Error::InvalidCircuit(format!(
                        "parameter index {param} but grid has {params} parameters"
                    )));
                }
                used[*param] = true;
            }
        }
        if let Some(k) = used.iter().position(|u| !u) {
            return Err(Error::InvalidCircuit(format!("parameter {k} is never used")));
        }
        Ok(())
    }

    /// Gate ops with trainable angles bound to `angles`, on the global qubits
    /// `map` (`map[k]` is the global index of local qubit `k`).
    pub fn bound_ops(&self, map: &[usize], angles: &[f64]) -> Result<Vec<GateOp>> {
        if map.len() != self.qubits {
            return Err(Error::WidthMismatch {
                register: Register::Qnn1,
                expected: self.qubits,
                got: map.len(),
            });
        }
        self.gates
            .iter()
            .map(|g| {
                let ctl = |cs: &[usize]| cs.iter().map(|&c| Control::on(map[c])).collect::<Vec<_>>();
                Ok(match g {
                    CircuitGate::Fixed {
                        gate,
                        target,
                        controls,
                    } => GateOp::fixed(*gate, map[*target]).with_controls(&ctl(controls)),
                    CircuitGate::Rotation {
                        axis,
                        angle,
                        target,
                        controls,
                    } => GateOp::rotation(*axis, *angle, map[*target]).with_controls(&ctl(controls)),
                    CircuitGate::Param {
                        axis,
                        target,
                        param,
                        controls,
                    } => {
                        let angle = *angles.get(*param).ok_or_else(|| {
                            Error::InvalidCircuit(format!("no value for parameter {param}"))
                        })?;
                        GateOp::rotation(*axis, angle, map[*target]).with_controls(&ctl(controls))
                    }
                    CircuitGate::Unitary {
                        targets,
                        matrix,
                        controls,
                    } => GateOp::matrix(targets.iter().map(|&t| map[t]).collect(), matrix.clone())?
                        .with_controls(&ctl(controls)),
                    CircuitGate::GlobalPhase { angle } => GateOp::phase(*angle),
                })
            })
            .collect()
    }

    /// Applies the circuit (or its adjoint) to `qubits` of `state`, with every
    /// gate additionally conditioned on `controls`.
    pub fn apply(
        &self,
        state: &mut StateVector,
        qubits: &[usize],
        angles: &[f64],
        controls: &[Control],
        adjoint: bool,
    ) -> Result<()> {
        let ops = self.bound_ops(qubits, angles)?;
        let ops = ops.into_iter().map(|g| g.with_controls(controls));
        if adjoint {
            for g in ops.rev() {
                state.apply(&g.adjoint())?;
            }
        } else {
            for g in ops {
                state.apply(&g)?;
            }
        }
        Ok(())
    }

    /// Standalone layout for simulating this circuit alone.
    pub fn standalone_layout(&self) -> Result<Arc<QubitLayout>> {
        QubitLayout::builder()
            .register(Register::Qnn1, self.qubits)
            .build()
            .map(Arc::new)
    }

    /// `U(θ)|0⟩`.
    pub fn simulate(&self, angles: &[f64]) -> Result<StateVector> {
        let layout = self.standalone_layout()?;
        let mut s = StateVector::zero(layout.clone());
        let qubits = layout.qubits(Register::Qnn1)?;
        self.apply(&mut s, &qubits, angles, &[], false)?;
        Ok(s)
    }

    /// Dense matrix of `U(θ)` in the standalone layout.
    pub fn matrix(&self, angles: &[f64]) -> Result<DMatrix<Complex64>> {
        let layout = self.standalone_layout()?;
        let qubits = layout.qubits(Register::Qnn1)?;
        operator_matrix(&layout, |s| self.apply(s, &qubits, angles, &[], false))
    }
}
