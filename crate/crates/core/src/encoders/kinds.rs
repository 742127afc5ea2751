use std::f64::consts::FRAC_PI_4;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AmplitudeEncoding, CostMap};
use crate::error::{Error, Result};
use crate::param::{apply_controlled_qnn, Circuit, ParamGridSpec};
use crate::sv::{
    hermiticity_deviation, tol, Axis, Control, FixedGate, GateOp, QubitLayout, Register,
    StateVector, UnitaryMatrix,
};

fn check_fixed(circuit: &Circuit, qubits: usize, what: &str) -> Result<()> {
    circuit.validate()?;
    if !circuit.is_fixed() {
        return Err(Error::InvalidCircuit(format!("{what} must not have trainable parameters")));
    }
    if circuit.qubits != qubits {
        return Err(Error::InvalidCircuit(format!(
            "{what} acts on {} qubits, ansatz on {qubits}",
            circuit.qubits
        )));
    }
    Ok(())
}

fn check_ansatz(grid: &ParamGridSpec, ansatz: &Circuit) -> Result<()> {
    ansatz.validate()?;
    if ansatz.num_params() > grid.params() {
        return Err(Error::InvalidCircuit(format!(
            "ansatz uses {} parameters, grid has {}",
            ansatz.num_params(),
            grid.params()
        )));
    }
    Ok(())
}

fn apply_fixed(
    state: &mut StateVector,
    circuit: &Circuit,
    register: Register,
    controls: &[Control],
    adjoint: bool,
) -> Result<()> {
    let qubits = state.layout().qubits(register)?;
    circuit.apply(state, &qubits, &[], controls, adjoint)
}

fn h(state: &mut StateVector, qubit: usize, controls: &[Control]) -> Result<()> {
    state.apply(&GateOp::fixed(FixedGate::H, qubit).with_controls(controls))
}

fn with(controls: &[Control], extra: Control) -> Vec<Control> {
    let mut c = controls.to_vec();
    c.push(extra);
    c
}

/// `Re⟨ψ|V|ψ⟩` for a fixed circuit `V`.
fn expectation(psi: &StateVector, v: &Circuit) -> Result<f64> {
    let mut w = psi.clone();
    let qubits = psi.layout().qubits(Register::Qnn1)?;
    v.apply(&mut w, &qubits, &[], &[], false)?;
    Ok(psi.overlap(&w)?.re)
}

/// Swap test between the QNN output and a target state `T|0⟩`. `E` is the fidelity.
#[derive(Debug, Clone)]
pub struct SwapEncoding {
    grid: ParamGridSpec,
    ansatz: Circuit,
    target: Circuit,
}

impl SwapEncoding {
    pub fn new(grid: ParamGridSpec, ansatz: Circuit, target: Circuit) -> Result<Self> {
        check_ansatz(&grid, &ansatz)?;
        check_fixed(&target, ansatz.qubits, "target circuit")?;
        Ok(Self {
            grid,
            ansatz,
            target,
        })
    }
}

impl AmplitudeEncoding for SwapEncoding {
    fn name(&self) -> &'static str {
        "swap"
    }

    fn grid(&self) -> &ParamGridSpec {
        &self.grid
    }

    fn work_registers(&self) -> Vec<(Register, usize)> {
        vec![
            (Register::SwapAncilla, 1),
            (Register::Qnn1, self.ansatz.qubits),
            (Register::Qnn2, self.ansatz.qubits),
        ]
    }

    fn test_qubit(&self, layout: &QubitLayout) -> Result<usize> {
        layout.qubit(Register::SwapAncilla, 0)
    }

    fn prepare(&self, state: &mut StateVector, adjoint: bool, controls: &[Control]) -> Result<()> {
        let anc = self.test_qubit(state.layout())?;
        let off = with(controls, Control::anti(anc));
        let on = with(controls, Control::on(anc));
        h(state, anc, controls)?;
        // the two branches act on disjoint subspaces, so their order is irrelevant
        apply_controlled_qnn(state, &self.grid, &self.ansatz, Register::Qnn1, adjoint, &off)?;
        apply_fixed(state, &self.target, Register::Qnn2, &off, adjoint)?;
        apply_fixed(state, &self.target, Register::Qnn1, &on, adjoint)?;
        apply_controlled_qnn(state, &self.grid, &self.ansatz, Register::Qnn2, adjoint, &on)?;
        h(state, anc, controls)
    }

    fn theta_range(&self) -> (f64, f64) {
        (FRAC_PI_4, FRAC_PI_2)
    }

    fn reference_value(&self, angles: &[f64]) -> Result<f64> {
        let p = self.ansatz.simulate(angles)?;
        let t = self.target.simulate(&[])?;
        Ok(p.fidelity(&t)?)
    }
}

/// Hadamard test of a Hermitian unitary observable. `E = ⟨T⟩`.
#[derive(Debug, Clone)]
pub struct HadamardEncoding {
    grid: ParamGridSpec,
    ansatz: Circuit,
    observable: Circuit,
}

impl HadamardEncoding {
    pub fn new(grid: ParamGridSpec, ansatz: Circuit, observable: Circuit) -> Result<Self> {
        check_ansatz(&grid, &ansatz)?;
        check_fixed(&observable, ansatz.qubits, "observable")?;
        let m = observable.matrix(&[])?;
        let dim = m.nrows();
        let data: Vec<Complex64> = m.transpose().iter().copied().collect();
        let deviation = hermiticity_deviation(dim, &data);
        if deviation > tol::UNITARY {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(Self {
            grid,
            ansatz,
            observable,
        })
    }
}

impl AmplitudeEncoding for HadamardEncoding {
    fn name(&self) -> &'static str {
        "hadamard"
    }

    fn grid(&self) -> &ParamGridSpec {
        &self.grid
    }

    fn work_registers(&self) -> Vec<(Register, usize)> {
        vec![
            (Register::HadamardAncilla, 1),
            (Register::Qnn1, self.ansatz.qubits),
        ]
    }

    fn test_qubit(&self, layout: &QubitLayout) -> Result<usize> {
        layout.qubit(Register::HadamardAncilla, 0)
    }

    fn prepare(&self, state: &mut StateVector, adjoint: bool, controls: &[Control]) -> Result<()> {
        let anc = self.test_qubit(state.layout())?;
        let on = with(controls, Control::on(anc));
        if !adjoint {
            apply_controlled_qnn(state, &self.grid, &self.ansatz, Register::Qnn1, false, controls)?;
            h(state, anc, controls)?;
            apply_fixed(state, &self.observable, Register::Qnn1, &on, false)?;
            h(state, anc, controls)
        } else {
            h(state, anc, controls)?;
            apply_fixed(state, &self.observable, Register::Qnn1, &on, true)?;
            h(state, anc, controls)?;
            apply_controlled_qnn(state, &self.grid, &self.ansatz, Register::Qnn1, true, controls)
        }
    }

    fn reference_value(&self, angles: &[f64]) -> Result<f64> {
        expectation(&self.ansatz.simulate(angles)?, &self.observable)
    }
}

/// Weighted unitary term of a Hamiltonian `H = Σ a_i U_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcuTerm {
    pub weight: f64,
    pub circuit: Circuit,
}

/// Hadamard test of `H = Σ a_i U_i` through prepare/select/unprepare.
/// `E = ⟨H⟩`.
#[derive(Debug, Clone)]
pub struct LcuEncoding {
    grid: ParamGridSpec,
    ansatz: Circuit,
    terms: Vec<LcuTerm>,
    width: usize,
    prep: Option<UnitaryMatrix>,
}

impl LcuEncoding {
    pub fn new(grid: ParamGridSpec, ansatz: Circuit, terms: Vec<LcuTerm>) -> Result<Self> {
        check_ansatz(&grid, &ansatz)?;
        if terms.is_empty() {
            return Err(Error::InvalidWeights("no terms".into()));
        }
        if let Some(t) = terms.iter().find(|t| !(t.weight > 0.0 && t.weight.is_finite())) {
            return Err(Error::InvalidWeights(format!("weight {} is not positive", t.weight)));
        }
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidWeights(format!("weights sum to {total}, expected 1")));
        }
        for t in &terms {
            check_fixed(&t.circuit, ansatz.qubits, "LCU term")?;
        }
        let width = terms.len().next_power_of_two().trailing_zeros() as usize;
        let amps: Vec<f64> = (0..1usize << width)
            .map(|i| terms.get(i).map_or(0.0, |t| t.weight.sqrt()))
            .collect();
        let prep = (width > 0).then(|| householder_prep(&amps));
        Ok(Self {
            grid,
            ansatz,
            terms,
            width,
            prep,
        })
    }

    pub fn terms(&self) -> &[LcuTerm] {
        &self.terms
    }

    fn apply_prep(&self, state: &mut StateVector, adjoint: bool, controls: &[Control]) -> Result<()> {
        if let Some(w) = &self.prep {
            let qubits = state.layout().qubits(Register::LcuAncilla)?;
            let m = if adjoint { w.adjoint() } else { w.clone() };
            state.apply(&GateOp::matrix(qubits, m)?.with_controls(controls))?;
        }
        Ok(())
    }

    fn apply_select(&self, state: &mut StateVector, anc: usize, adjoint: bool, controls: &[Control]) -> Result<()> {
        let lcu = state.layout().qubits(Register::LcuAncilla)?;
        for (i, term) in self.terms.iter().enumerate() {
            let mut c = with(controls, Control::on(anc));
            c.extend(Control::on_value(&lcu, i));
            apply_fixed(state, &term.circuit, Register::Qnn1, &c, adjoint)?;
        }
        Ok(())
    }
}

/// Real orthogonal matrix with first column `v` (unit norm).
pub(crate) fn householder_prep(v: &[f64]) -> UnitaryMatrix {
    let n = v.len();
    let mut w: Vec<f64> = v.iter().map(|x| -x).collect();
    w[0] += 1.0;
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            let id = if r == c { 1.0 } else { 0.0 };
            let refl = if norm2 > 1e-30 { 2.0 * w[r] * w[c] / norm2 } else { 0.0 };
            data[r * n + c] = Complex64::new(id - refl, 0.0);
        }
    }
    UnitaryMatrix::new_unchecked(n, data)
}

impl AmplitudeEncoding for LcuEncoding {
    fn name(&self) -> &'static str {
        "lcu"
    }

    fn grid(&self) -> &ParamGridSpec {
        &self.grid
    }

    fn work_registers(&self) -> Vec<(Register, usize)> {
        vec![
            (Register::HadamardAncilla, 1),
            (Register::LcuAncilla, self.width),
            (Register::Qnn1, self.ansatz.qubits),
        ]
    }

    fn test_qubit(&self, layout: &QubitLayout) -> Result<usize> {
        layout.qubit(Register::HadamardAncilla, 0)
    }

    fn prepare(&self, state: &mut StateVector, adjoint: bool, controls: &[Control]) -> Result<()> {
        let anc = self.test_qubit(state.layout())?;
        if !adjoint {
            apply_controlled_qnn(state, &self.grid, &self.ansatz, Register::Qnn1, false, controls)?;
            self.apply_prep(state, false, controls)?;
            h(state, anc, controls)?;
            self.apply_select(state, anc, false, controls)?;
            h(state, anc, controls)?;
            self.apply_prep(state, true, controls)
        } else {
            self.apply_prep(state, false, controls)?;
            h(state, anc, controls)?;
            self.apply_select(state, anc, true, controls)?;
            h(state, anc, controls)?;
            self.apply_prep(state, true, controls)?;
            apply_controlled_qnn(state, &self.grid, &self.ansatz, Register::Qnn1, true, controls)
        }
    }

    fn reference_value(&self, angles: &[f64]) -> Result<f64> {
        let psi = self.ansatz.simulate(angles)?;
        self.terms
            .iter()
            .map(|t| expectation(&psi, &t.circuit).map(|e| t.weight * e))
            .sum()
    }
}

/// One labelled training sample read out on a designated qubit.
///
/// The likelihood `L = p(y)` relates to the encoded value through
/// `E = 1 − 2L`; the test reflection is `+Z` for label 1 and `−Z` for label 0.
#[derive(Debug, Clone)]
pub struct ClassifierEncoding {
    grid: ParamGridSpec,
    ansatz: Circuit,
    features: Vec<f64>,
    label: u8,
    qubit: usize,
}

impl ClassifierEncoding {
    pub fn new(
        grid: ParamGridSpec,
        ansatz: Circuit,
        features: Vec<f64>,
        label: u8,
        qubit: usize,
    ) -> Result<Self> {
        check_ansatz(&grid, &ansatz)?;
        if label > 1 {
            return Err(Error::InvalidArgument(format!("label {label} is not 0 or 1")));
        }
        if qubit >= ansatz.qubits {
            return Err(Error::InvalidArgument(format!(
                "designated qubit {qubit} outside {} qubits",
                ansatz.qubits
            )));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("feature not finite".into()));
        }
        Ok(Self {
            grid,
            ansatz,
            features,
            label,
            qubit,
        })
    }

    /// Ry(x_k) on local qubit k, for the first min(features, n) qubits.
    pub fn embedding(&self) -> Circuit {
        let mut c = Circuit::new(self.ansatz.qubits);
        for (k, &x) in self.features.iter().take(self.ansatz.qubits).enumerate() {
            c = c.rotation(Axis::Y, x, k);
        }
        c
    }

    pub fn label(&self) -> u8 {
        self.label
    }
}

impl AmplitudeEncoding for ClassifierEncoding {
    fn name(&self) -> &'static str {
        "classifier"
    }

    fn grid(&self) -> &ParamGridSpec {
        &self.grid
    }

    fn work_registers(&self) -> Vec<(Register, usize)> {
        vec![(Register::Qnn1, self.ansatz.qubits)]
    }

    fn test_qubit(&self, layout: &QubitLayout) -> Result<usize> {
        layout.qubit(Register::Qnn1, self.qubit)
    }

    fn flag_sign(&self) -> f64 {
        if self.label == 1 {
            1.0
        } else {
            -1.0
        }
    }

    fn prepare(&self, state: &mut StateVector, adjoint: bool, controls: &[Control]) -> Result<()> {
        let emb = self.embedding();
        if !adjoint {
            apply_fixed(state, &emb, Register::Qnn1, controls, false)?;
            apply_controlled_qnn(state, &self.grid, &self.ansatz, Register::Qnn1, false, controls)
        } else {
            apply_controlled_qnn(state, &self.grid, &self.ansatz, Register::Qnn1, true, controls)?;
            apply_fixed(state, &emb, Register::Qnn1, controls, true)
        }
    }

    fn cost_map(&self) -> CostMap {
        CostMap {
            scale: -0.5,
            offset: 0.5,
        }
    }

    fn reference_value(&self, angles: &[f64]) -> Result<f64> {
        let mut full = self.embedding();
        full.gates.extend(self.ansatz.gates.iter().cloned());
        let s = full.simulate(angles)?;
        let q = s.layout().qubit(Register::Qnn1, self.qubit)?;
        let p1 = s.probability_where(|i| (i >> q) & 1 == 1);
        Ok(self.flag_sign() * (1.0 - 2.0 * p1))
    }
}
