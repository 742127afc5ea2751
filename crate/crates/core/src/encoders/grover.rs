use std::f64::consts::PI;

use num_complex::Complex64;

use super::{encoding_layout, work_register_names, AmplitudeEncoding};
use crate::error::Result;
use crate::sv::{Control, FixedGate, GateOp, QubitLayout, Register, StateVector};

/// `G = U C₂ U† C₁` or `G* = C₂ U† C₁ U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroverVariant {
    G,
    GStar,
}

/// `C = I − 2|0…0⟩⟨0…0|` on the given registers, as a single phase gate
/// anti-controlled on every qubit.
pub fn build_flip_zero(layout: &QubitLayout, registers: &[Register]) -> Result<Vec<GateOp>> {
    let mut controls = Vec::new();
    for r in registers {
        for q in layout.qubits(*r)? {
            controls.push(Control::anti(q));
        }
    }
    Ok(vec![GateOp::phase(PI).with_controls(&controls)])
}

fn apply_c1(state: &mut StateVector, enc: &dyn AmplitudeEncoding, controls: &[Control]) -> Result<()> {
    let q = enc.test_qubit(state.layout())?;
    state.apply(&GateOp::fixed(FixedGate::Z, q).with_controls(controls))?;
    if enc.flag_sign() < 0.0 {
        state.apply(&GateOp::phase(PI).with_controls(controls))?;
    }
    Ok(())
}

fn apply_c2(state: &mut StateVector, enc: &dyn AmplitudeEncoding, controls: &[Control]) -> Result<()> {
    for g in build_flip_zero(state.layout(), &work_register_names(enc))? {
        state.apply(&g.with_controls(controls))?;
    }
    Ok(())
}

fn apply_once(
    state: &mut StateVector,
    enc: &dyn AmplitudeEncoding,
    variant: GroverVariant,
    inverse: bool,
    controls: &[Control],
) -> Result<()> {
    match (variant, inverse) {
        (GroverVariant::G, false) => {
            apply_c1(state, enc, controls)?;
            enc.prepare(state, true, controls)?;
            apply_c2(state, enc, controls)?;
            enc.prepare(state, false, controls)
        }
        (GroverVariant::G, true) => {
            enc.prepare(state, true, controls)?;
            apply_c2(state, enc, controls)?;
            enc.prepare(state, false, controls)?;
            apply_c1(state, enc, controls)
        }
        (GroverVariant::GStar, false) => {
            enc.prepare(state, false, controls)?;
            apply_c1(state, enc, controls)?;
            enc.prepare(state, true, controls)?;
            apply_c2(state, enc, controls)
        }
        (GroverVariant::GStar, true) => {
            apply_c2(state, enc, controls)?;
            enc.prepare(state, false, controls)?;
            apply_c1(state, enc, controls)?;
            enc.prepare(state, true, controls)
        }
    }
}

/// Applies the Grover operator `m` times.
pub fn apply_grover_op(
    state: &mut StateVector,
    enc: &dyn AmplitudeEncoding,
    variant: GroverVariant,
    m: usize,
) -> Result<()> {
    apply_grover_power(state, enc, variant, m as i64, &[])
}

/// Applies `G^power` (negative powers use the inverse), conditioned on `controls`.
pub fn apply_grover_power(
    state: &mut StateVector,
    enc: &dyn AmplitudeEncoding,
    variant: GroverVariant,
    power: i64,
    controls: &[Control],
) -> Result<()> {
    for _ in 0..power.unsigned_abs() {
        apply_once(state, enc, variant, power < 0, controls)?;
    }
    Ok(())
}

fn eigenvalues_2x2(m: [[Complex64; 2]; 2]) -> [Complex64; 2] {
    let half_tr = (m[0][0] + m[1][1]) / 2.0;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (half_tr * half_tr - det).sqrt();
    [half_tr + disc, half_tr - disc]
}

/// Eigenphases of the Grover operator restricted to the invariant subspace of
/// block `j`, spanned by the prepared state and its image.
///
/// Returns one phase when that state is already an eigenvector.
pub fn block_eigenphases(
    enc: &dyn AmplitudeEncoding,
    variant: GroverVariant,
    j: usize,
) -> Result<Vec<f64>> {
    let layout = encoding_layout(enc, 0, &[])?;
    let index = layout.index_of(Register::Parameter, j)?;
    let mut v1 = StateVector::basis(layout, index)?;
    if variant == GroverVariant::G {
        enc.prepare(&mut v1, false, &[])?;
    }
    let mut gv1 = v1.clone();
    apply_grover_op(&mut gv1, enc, variant, 1)?;
    let a = v1.overlap(&gv1)?;
    let resid: Vec<Complex64> = gv1
        .amplitudes()
        .iter()
        .zip(v1.amplitudes())
        .map(|(g, v)| g - a * v)
        .collect();
    let rnorm = resid.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if rnorm < 1e-9 {
        return Ok(vec![a.arg()]);
    }
    let v2: Vec<Complex64> = resid.iter().map(|z| z / rnorm).collect();
    let v2 = StateVector::from_amplitudes(v1.layout_arc().clone(), v2)?;
    let mut gv2 = v2.clone();
    apply_grover_op(&mut gv2, enc, variant, 1)?;
    let m = [
        [a, v1.overlap(&gv2)?],
        [v2.overlap(&gv1)?, v2.overlap(&gv2)?],
    ];
    Ok(eigenvalues_2x2(m).iter().map(|z| z.arg()).collect())
}
