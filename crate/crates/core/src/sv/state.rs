use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use super::gate::{GateKind, GateOp, UnitaryMatrix};
use super::layout::{QubitLayout, Register};
use super::tol;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Calls `f` with every index whose bits under `fixed` equal `value`.
#[inline]
fn for_each_base(dim: usize, fixed: usize, value: usize, mut f: impl FnMut(usize)) {
    let free = !fixed & (dim - 1);
    let mut sub = 0usize;
    loop {
        f(sub | value);
        if sub == free {
            break;
        }
        sub = sub.wrapping_sub(free) & free;
    }
}

/// Offsets of the local basis states of `qubits` (first qubit most significant).
fn local_offsets(qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|l| {
            qubits
                .iter()
                .enumerate()
                .filter(|(i, _)| (l >> (k - 1 - i)) & 1 == 1)
                .fold(0, |acc, (_, &q)| acc | (1 << q))
        })
        .collect()
}

/// Dense statevector over a named qubit layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: Arc<QubitLayout>,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zero basis state.
    pub fn zero(layout: Arc<QubitLayout>) -> Self {
        let mut amps = vec![ZERO; layout.dim()];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { layout, amps }
    }

    pub fn basis(layout: Arc<QubitLayout>, index: usize) -> Result<Self> {
        let dim = layout.dim();
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, total: dim });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    pub fn from_amplitudes(layout: Arc<QubitLayout>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: amps.len(),
            });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > tol::NORM {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { layout, amps })
    }

    /// Random Haar-ish state from normal-distributed amplitudes.
    pub fn random<R: Rng + ?Sized>(layout: Arc<QubitLayout>, rng: &mut R) -> Self {
        let mut amps: Vec<Complex64> = (0..layout.dim())
            .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Self { layout, amps }
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn layout_arc(&self) -> &Arc<QubitLayout> {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.layout.num_qubits())?;
        let (cmask, cval) = gate.control_pattern();
        let dim = self.amps.len();
        match &gate.kind {
            GateKind::Phase(angle) => {
                let ph = Complex64::from_polar(1.0, *angle);
                for_each_base(dim, cmask, cval, |i| self.amps[i] *= ph);
            }
            GateKind::Fixed(_) | GateKind::Rotation { .. } => {
                let m = gate.local_matrix();
                self.apply_1q(gate.targets[0], &m, cmask, cval);
            }
            GateKind::Matrix(u) => {
                if gate.targets.len() == 1 {
                    self.apply_1q(gate.targets[0], u.data(), cmask, cval);
                } else {
                    self.apply_kq(&gate.targets, u, cmask, cval);
                }
            }
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a GateOp>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    fn apply_1q(&mut self, target: usize, m: &[Complex64], cmask: usize, cval: usize) {
        let dim = self.amps.len();
        let tbit = 1usize << target;
        let (m00, m01, m10, m11) = (m[0], m[1], m[2], m[3]);
        if m01 == ZERO && m10 == ZERO {
            for_each_base(dim, cmask | tbit, cval, |i0| {
                self.amps[i0] *= m00;
                self.amps[i0 | tbit] *= m11;
            });
            return;
        }
        for_each_base(dim, cmask | tbit, cval, |i0| {
            let i1 = i0 | tbit;
            let a0 = self.amps[i0];
            let a1 = self.amps[i1];
            self.amps[i0] = m00 * a0 + m01 * a1;
            self.amps[i1] = m10 * a0 + m11 * a1;
        });
    }

    fn apply_kq(&mut self, targets: &[usize], u: &UnitaryMatrix, cmask: usize, cval: usize) {
        let dim = self.amps.len();
        let offsets = local_offsets(targets);
        let tmask = offsets[offsets.len() - 1];
        let n = offsets.len();
        let data = u.data();
        let mut buf = vec![ZERO; n];
        for_each_base(dim, cmask | tmask, cval, |base| {
            for (b, &o) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base | o];
            }
            for (r, &o) in offsets.iter().enumerate() {
                let row = &data[r * n..(r + 1) * n];
                self.amps[base | o] = row.iter().zip(&buf).map(|(m, a)| m * a).sum();
            }
        });
    }

    /// Applies `F_d` (or `F_d†`) to `register`, where
    /// `F_d|j⟩ = d^{-1/2} Σ_k ω^{-jk}|k⟩` and `ω = e^{2πi/d}`.
    pub fn apply_qft(&mut self, register: Register, inverse: bool) -> Result<()> {
        let qubits = self.layout.qubits(register)?;
        self.apply_qft_on(&qubits, inverse)
    }

    /// QFT on an explicit qubit list, first qubit most significant.
    pub fn apply_qft_on(&mut self, qubits: &[usize], inverse: bool) -> Result<()> {
        if qubits.is_empty() {
            return Ok(());
        }
        self.check_qubits(qubits)?;
        let offsets = local_offsets(qubits);
        let n = offsets.len();
        let mut planner = FftPlanner::<f64>::new();
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let scale = 1.0 / (n as f64).sqrt();
        let mask = offsets[n - 1];
        let mut buf = vec![ZERO; n];
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        let dim = self.amps.len();
        let amps = &mut self.amps;
        for_each_base(dim, mask, 0, |base| {
            for (b, &o) in buf.iter_mut().zip(&offsets) {
                *b = amps[base | o];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (b, &o) in buf.iter().zip(&offsets) {
                amps[base | o] = b * scale;
            }
        });
        Ok(())
    }

    /// Multiplies each amplitude by `phase(v)` where `v` is the value held by
    /// `qubits` (first qubit most significant). Each phase must have unit modulus.
    pub fn apply_diagonal_on(
        &mut self,
        qubits: &[usize],
        phase: impl Fn(usize) -> Complex64,
    ) -> Result<()> {
        self.check_qubits(qubits)?;
        let offsets = local_offsets(qubits);
        let table: Vec<Complex64> = (0..offsets.len()).map(&phase).collect();
        if let Some(bad) = table.iter().find(|p| (p.norm() - 1.0).abs() > tol::UNITARY) {
            return Err(Error::NonUnitary {
                deviation: (bad.norm() - 1.0).abs(),
            });
        }
        let k = qubits.len();
        for (i, a) in self.amps.iter_mut().enumerate() {
            let mut v = 0usize;
            for (pos, &q) in qubits.iter().enumerate() {
                v |= ((i >> q) & 1) << (k - 1 - pos);
            }
            *a *= table[v];
        }
        Ok(())
    }

    /// Diagonal phase keyed on the value of a register.
    pub fn apply_register_diagonal(
        &mut self,
        register: Register,
        phase: impl Fn(usize) -> Complex64,
    ) -> Result<()> {
        let qubits = self.layout.qubits(register)?;
        self.apply_diagonal_on(&qubits, phase)
    }

    /// Dense unitary on `qubits` (first qubit most significant).
    pub fn apply_matrix_on(&mut self, qubits: &[usize], u: &UnitaryMatrix) -> Result<()> {
        let gate = GateOp::matrix(qubits.to_vec(), u.clone())?;
        self.apply(&gate)
    }

    pub fn apply_register_matrix(&mut self, register: Register, u: &UnitaryMatrix) -> Result<()> {
        let qubits = self.layout.qubits(register)?;
        self.apply_matrix_on(&qubits, u)
    }

    /// Hadamard on every qubit of `register`.
    pub fn hadamard_register(&mut self, register: Register) -> Result<()> {
        for q in self.layout.qubits(register)? {
            self.apply(&GateOp::fixed(super::gate::FixedGate::H, q))?;
        }
        Ok(())
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        let total = self.layout.num_qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= total {
                return Err(Error::IndexOutOfRange { index: q, total });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    /// Marginal distribution of `register`.
    pub fn register_probabilities(&self, register: Register) -> Result<Vec<f64>> {
        let range = self.layout.range(register)?;
        let mask = (1usize << range.len()) - 1;
        let mut probs = vec![0.0; 1 << range.len()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[(i >> range.start) & mask] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Total probability of indices satisfying `pred`.
    pub fn probability_where(&self, pred: impl Fn(usize) -> bool) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Probability that every listed register reads zero.
    pub fn zero_probability(&self, registers: &[Register]) -> f64 {
        let mask = registers
            .iter()
            .filter_map(|r| self.layout.mask(*r).ok())
            .fold(0, |m, r| m | r);
        self.probability_where(|i| i & mask == 0)
    }

    /// Samples `register` and collapses the state onto the outcome.
    /// Returns the outcome value (register bits, first qubit most significant).
    pub fn measure_register<R: Rng + ?Sized>(
        &mut self,
        register: Register,
        rng: &mut R,
    ) -> Result<usize> {
        let probs = self.register_probabilities(register)?;
        let outcome = sample_index(&probs, rng);
        let range = self.layout.range(register)?;
        let mask = (1usize << range.len()) - 1;
        let p = probs[outcome];
        assert!(p > 0.0, "collapsed onto a zero-probability branch");
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i >> range.start) & mask == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok(outcome)
    }

    /// Projects onto the given register value without renormalizing.
    /// Returns the squared norm of the kept branch.
    pub fn project(&mut self, register: Register, value: usize) -> Result<f64> {
        let range = self.layout.range(register)?;
        let mask = (1usize << range.len()) - 1;
        let mut kept = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i >> range.start) & mask == value {
                kept += a.norm_sqr();
            } else {
                *a = ZERO;
            }
        }
        Ok(kept)
    }

    pub fn renormalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if n <= 0.0 {
            return Err(Error::NotNormalized(n));
        }
        let s = 1.0 / n.sqrt();
        for a in &mut self.amps {
            *a *= s;
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        self.overlap(other).map(|o| o.norm_sqr())
    }

    /// Equality up to global phase within the state tolerance.
    pub fn approx_eq_up_to_phase(&self, other: &StateVector) -> bool {
        match self.overlap(other) {
            Ok(o) => {
                let ph = if o.norm() > 0.0 { o / o.norm() } else { Complex64::new(1.0, 0.0) };
                self.amps
                    .iter()
                    .zip(&other.amps)
                    .all(|(a, b)| (a * ph - b).norm() < tol::STATE)
            }
            Err(_) => false,
        }
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws an index from an (approximately) normalized distribution.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let x = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last = i;
            acc += p;
            if x < acc {
                return i;
            }
        }
    }
    last
}

/// Matrix of the linear map realized by `op` on `layout`, built column by column.
pub fn operator_matrix(
    layout: &Arc<QubitLayout>,
    mut op: impl FnMut(&mut StateVector) -> Result<()>,
) -> Result<DMatrix<Complex64>> {
    let dim = layout.dim();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for c in 0..dim {
        let mut s = StateVector::basis(layout.clone(), c)?;
        op(&mut s)?;
        for (r, a) in s.amps.iter().enumerate() {
            m[(r, c)] = *a;
        }
    }
    Ok(m)
}
