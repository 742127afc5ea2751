//! Quantized parameter grids, circuit descriptions and the controlled-QNN
//! operator `P = Σ_j |j⟩⟨j| ⊗ P_j`.

mod circuit;
mod grid;

pub use circuit::{Circuit, CircuitGate};
pub use grid::{Bitstring, ParamGridSpec};

use crate::error::{Error, Result};
use crate::sv::{Control, GateOp, Register, StateVector};

/// Gate sequence of the controlled QNN on the given layout.
///
/// Each trainable rotation `R(θ_k)` becomes `d` rotations by `θ̄_k/2, θ̄_k/4, …`
/// controlled on the bits of parameter `k`, most significant first.
pub fn controlled_qnn_ops(
    state: &StateVector,
    grid: &ParamGridSpec,
    ansatz: &Circuit,
    qnn: Register,
) -> Result<Vec<GateOp>> {
    let layout = state.layout();
    let pwidth = layout.width(Register::Parameter)?;
    if pwidth != grid.total_bits() {
        return Err(Error::WidthMismatch {
            register: Register::Parameter,
            expected: grid.total_bits(),
            got: pwidth,
        });
    }
    let qwidth = layout.width(qnn)?;
    if qwidth != ansatz.qubits {
        return Err(Error::WidthMismatch {
            register: qnn,
            expected: ansatz.qubits,
            got: qwidth,
        });
    }
    if ansatz.num_params() > grid.params() {
        return Err(Error::InvalidCircuit(format!(
            "ansatz uses {} parameters, grid has {}",
            ansatz.num_params(),
            grid.params()
        )));
    }
    let map = layout.qubits(qnn)?;
    let pbits = layout.qubits(Register::Parameter)?;
    let d = grid.bits();
    let mut ops = Vec::new();
    for gate in &ansatz.gates {
        match gate {
            CircuitGate::Param {
                axis,
                target,
                param,
                controls,
            } => {
                let local: Vec<Control> = controls.iter().map(|&c| Control::on(map[c])).collect();
                let mut angle = grid.max_angle(*param);
                for m in 0..d {
                    angle /= 2.0;
                    ops.push(
                        GateOp::rotation(*axis, angle, map[*target])
                            .controlled(pbits[param * d + m])
                            .with_controls(&local),
                    );
                }
            }
            other => {
                let single = Circuit {
                    qubits: ansatz.qubits,
                    gates: vec![other.clone()],
                };
                ops.extend(single.bound_ops(&map, &[])?);
            }
        }
    }
    Ok(ops)
}

/// Applies `P` (or `P†`) with every gate additionally conditioned on `controls`.
pub fn apply_controlled_qnn(
    state: &mut StateVector,
    grid: &ParamGridSpec,
    ansatz: &Circuit,
    qnn: Register,
    adjoint: bool,
    controls: &[Control],
) -> Result<()> {
    let ops = controlled_qnn_ops(state, grid, ansatz, qnn)?;
    if adjoint {
        for g in ops.iter().rev() {
            state.apply(&g.adjoint().with_controls(controls))?;
        }
    } else {
        for g in ops {
            state.apply(&g.with_controls(controls))?;
        }
    }
    Ok(())
}
