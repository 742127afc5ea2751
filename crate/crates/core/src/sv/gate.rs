use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tol;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Rotation axis. `R_a(θ) = exp(-iθσ_a/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Named single-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedGate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
}

impl FixedGate {
    pub fn matrix(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let t = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        match self {
            FixedGate::I => [ONE, ZERO, ZERO, ONE],
            FixedGate::X => [ZERO, ONE, ONE, ZERO],
            FixedGate::Y => [ZERO, -I, I, ZERO],
            FixedGate::Z => [ONE, ZERO, ZERO, -ONE],
            FixedGate::H => [h, h, h, -h],
            FixedGate::S => [ONE, ZERO, ZERO, I],
            FixedGate::Sdg => [ONE, ZERO, ZERO, -I],
            FixedGate::T => [ONE, ZERO, ZERO, t],
            FixedGate::Tdg => [ONE, ZERO, ZERO, t.conj()],
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            FixedGate::S => FixedGate::Sdg,
            FixedGate::Sdg => FixedGate::S,
            FixedGate::T => FixedGate::Tdg,
            FixedGate::Tdg => FixedGate::T,
            g => g,
        }
    }
}

pub fn rotation_matrix(axis: Axis, angle: f64) -> [Complex64; 4] {
    let c = (angle / 2.0).cos();
    let s = (angle / 2.0).sin();
    match axis {
        Axis::X => [
            Complex64::new(c, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, -s),
            Complex64::new(c, 0.0),
        ],
        Axis::Y => [
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
        Axis::Z => [
            Complex64::from_polar(1.0, -angle / 2.0),
            ZERO,
            ZERO,
            Complex64::from_polar(1.0, angle / 2.0),
        ],
    }
}

/// Dense row-major square matrix checked for unitarity on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        let deviation = unitarity_deviation(dim, &data);
        if deviation > tol::UNITARY {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(Self { dim, data })
    }

    /// Skips the unitarity check. Callers guarantee unitarity by construction.
    pub(crate) fn new_unchecked(dim: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn is_hermitian(&self) -> bool {
        hermiticity_deviation(self.dim, &self.data) <= tol::UNITARY
    }
}

/// Serialized as a list of rows of `[re, im]` pairs.
impl Serialize for UnitaryMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .data
            .chunks(self.dim)
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(serde::de::Error::custom("matrix must be square"));
        }
        let data = rows
            .into_iter()
            .flatten()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        UnitaryMatrix::new(dim, data).map_err(serde::de::Error::custom)
    }
}

/// max |(M†M − I)_{ij}|
pub fn unitarity_deviation(dim: usize, m: &[Complex64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = ZERO;
            for k in 0..dim {
                acc += m[k * dim + i].conj() * m[k * dim + j];
            }
            if i == j {
                acc -= ONE;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

pub fn hermiticity_deviation(dim: usize, m: &[Complex64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            worst = worst.max((m[i * dim + j] - m[j * dim + i].conj()).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Acts when the control qubit is |1⟩.
    Control,
    /// Acts when the control qubit is |0⟩.
    AntiControl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Control,
        }
    }

    pub fn anti(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::AntiControl,
        }
    }

    /// Controls selecting `value` on `qubits` (most significant first).
    pub fn on_value(qubits: &[usize], value: usize) -> Vec<Control> {
        let w = qubits.len();
        qubits
            .iter()
            .enumerate()
            .map(|(k, &q)| {
                if (value >> (w - 1 - k)) & 1 == 1 {
                    Control::on(q)
                } else {
                    Control::anti(q)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    Fixed(FixedGate),
    Rotation { axis: Axis, angle: f64 },
    Matrix(UnitaryMatrix),
    /// Scalar phase `e^{iφ}` on the subspace selected by the controls.
    /// Takes no targets.
    Phase(f64),
}

/// A (possibly controlled) unitary on a set of target qubits.
///
/// For multi-qubit matrices the first target is the most significant bit of
/// the local matrix index.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl GateOp {
    pub fn fixed(gate: FixedGate, target: usize) -> Self {
        Self {
            kind: GateKind::Fixed(gate),
            targets: vec![target],
            controls: Vec::new(),
        }
    }

    pub fn rotation(axis: Axis, angle: f64, target: usize) -> Self {
        Self {
            kind: GateKind::Rotation { axis, angle },
            targets: vec![target],
            controls: Vec::new(),
        }
    }

    pub fn matrix(targets: Vec<usize>, matrix: UnitaryMatrix) -> Result<Self> {
        let expected = 1usize << targets.len();
        if matrix.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: matrix.dim(),
            });
        }
        Ok(Self {
            kind: GateKind::Matrix(matrix),
            targets,
            controls: Vec::new(),
        })
    }

    pub fn phase(angle: f64) -> Self {
        Self {
            kind: GateKind::Phase(angle),
            targets: Vec::new(),
            controls: Vec::new(),
        }
    }

    pub fn controlled(mut self, qubit: usize) -> Self {
        self.controls.push(Control::on(qubit));
        self
    }

    pub fn anti_controlled(mut self, qubit: usize) -> Self {
        self.controls.push(Control::anti(qubit));
        self
    }

    pub fn with_controls(mut self, controls: &[Control]) -> Self {
        self.controls.extend_from_slice(controls);
        self
    }

    pub fn adjoint(&self) -> Self {
        let kind = match &self.kind {
            GateKind::Fixed(g) => GateKind::Fixed(g.adjoint()),
            GateKind::Rotation { axis, angle } => GateKind::Rotation {
                axis: *axis,
                angle: -angle,
            },
            GateKind::Matrix(m) => GateKind::Matrix(m.adjoint()),
            GateKind::Phase(a) => GateKind::Phase(-a),
        };
        Self {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    /// Local matrix on the targets, row-major, dimension `2^targets`.
    pub fn local_matrix(&self) -> Vec<Complex64> {
        match &self.kind {
            GateKind::Fixed(g) => g.matrix().to_vec(),
            GateKind::Rotation { axis, angle } => rotation_matrix(*axis, *angle).to_vec(),
            GateKind::Matrix(m) => m.data().to_vec(),
            GateKind::Phase(a) => vec![Complex64::from_polar(1.0, *a)],
        }
    }

    pub(crate) fn validate(&self, num_qubits: usize) -> Result<()> {
        let mut seen = Vec::with_capacity(self.targets.len() + self.controls.len());
        for q in self
            .targets
            .iter()
            .copied()
            .chain(self.controls.iter().map(|c| c.qubit))
        {
            if q >= num_qubits {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    total: num_qubits,
                });
            }
            if seen.contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
            seen.push(q);
        }
        match &self.kind {
            GateKind::Fixed(_) | GateKind::Rotation { .. } if self.targets.len() != 1 => {
                Err(Error::InvalidArgument(
                    "single-qubit gate needs exactly one target".into(),
                ))
            }
            GateKind::Phase(_) if !self.targets.is_empty() => Err(Error::InvalidArgument(
                "phase gate takes no targets".into(),
            )),
            _ => Ok(()),
        }
    }

    /// (mask, value) such that the gate acts on index `i` iff `i & mask == value`.
    pub(crate) fn control_pattern(&self) -> (usize, usize) {
        self.controls.iter().fold((0, 0), |(mask, value), c| {
            let bit = 1usize << c.qubit;
            match c.polarity {
                Polarity::Control => (mask | bit, value | bit),
                Polarity::AntiControl => (mask | bit, value),
            }
        })
    }
}
