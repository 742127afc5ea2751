#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use qtrain::encoders::LcuTerm;
use qtrain::param::{Circuit, ParamGridSpec};
use qtrain::sv::{Axis, FixedGate, UnitaryMatrix};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Single-qubit Pauli term as a circuit on `n` qubits.
pub fn pauli(n: usize, gate: FixedGate, target: usize) -> Circuit {
    Circuit::new(n).fixed(gate, target)
}

pub fn zz(n: usize, a: usize, b: usize) -> Circuit {
    Circuit::new(n).fixed(FixedGate::Z, a).fixed(FixedGate::Z, b)
}

pub fn term(weight: f64, circuit: Circuit) -> LcuTerm {
    LcuTerm { weight, circuit }
}

/// Toy VQE ansatz: Ry(θ) on one qubit.
pub fn ry_ansatz() -> Circuit {
    Circuit::new(1).param(Axis::Y, 0, 0)
}

/// Random two-qubit ansatz over `params` parameters with some fixed gates mixed in.
pub fn random_ansatz<R: Rng>(rng: &mut R, qubits: usize, params: usize) -> Circuit {
    let axes = [Axis::X, Axis::Y, Axis::Z];
    let mut c = Circuit::new(qubits);
    for q in 0..qubits {
        c = c.rotation(Axis::Y, rng.gen_range(0.0..PI), q);
    }
    for k in 0..params {
        let q = rng.gen_range(0..qubits);
        c = c.param(axes[rng.gen_range(0..2)], q, k);
        if qubits > 1 {
            c = c.controlled_fixed(FixedGate::X, q, (q + 1) % qubits);
        }
        c = c.rotation(axes[rng.gen_range(0..3)], rng.gen_range(-PI..PI), rng.gen_range(0..qubits));
    }
    c
}

/// Random fixed circuit preparing a target state.
pub fn random_state_circuit<R: Rng>(rng: &mut R, qubits: usize) -> Circuit {
    let mut c = Circuit::new(qubits);
    for q in 0..qubits {
        c = c
            .rotation(Axis::Y, rng.gen_range(0.0..PI), q)
            .rotation(Axis::Z, rng.gen_range(-PI..PI), q);
    }
    if qubits > 1 {
        c = c.controlled_fixed(FixedGate::X, 0, 1);
    }
    c
}

pub fn grid(params: usize, bits: usize) -> ParamGridSpec {
    ParamGridSpec::new(params, bits).unwrap()
}

pub fn unitary(dim: usize, rows: &[&[Complex64]]) -> UnitaryMatrix {
    UnitaryMatrix::new(dim, rows.iter().flat_map(|r| r.iter().copied()).collect()).unwrap()
}
