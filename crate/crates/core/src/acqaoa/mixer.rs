use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::ParamGridSpec;
use crate::sv::{Register, StateVector, UnitaryMatrix};

/// Largest generator built densely.
pub const DENSE_CAP: usize = 4096;
/// Largest per-register width diagonalized densely.
pub const EIGEN_BITS: usize = 6;

/// Digitized continuous-variable generators: position `J`, momentum
/// `S = F†JF`, squeezing `T = JS + SJ`, and two-register products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MixerKind {
    #[serde(rename = "J")]
    J,
    #[serde(rename = "S")]
    S,
    #[serde(rename = "T")]
    T,
    #[serde(rename = "J2")]
    J2,
    #[serde(rename = "S2")]
    S2,
    #[serde(rename = "J2+S2")]
    J2S2,
    #[serde(rename = "JxJ")]
    JJ,
    #[serde(rename = "SxS")]
    SS,
    #[serde(rename = "TxT")]
    TT,
    #[serde(rename = "SxT")]
    ST,
}

impl MixerKind {
    pub const ALL: [MixerKind; 10] = [
        MixerKind::J,
        MixerKind::S,
        MixerKind::T,
        MixerKind::J2,
        MixerKind::S2,
        MixerKind::J2S2,
        MixerKind::JJ,
        MixerKind::SS,
        MixerKind::TT,
        MixerKind::ST,
    ];

    pub fn is_pair(self) -> bool {
        matches!(self, MixerKind::JJ | MixerKind::SS | MixerKind::TT | MixerKind::ST)
    }

    pub fn name(self) -> &'static str {
        match self {
            MixerKind::J => "J",
            MixerKind::S => "S",
            MixerKind::T => "T",
            MixerKind::J2 => "J2",
            MixerKind::S2 => "S2",
            MixerKind::J2S2 => "J2+S2",
            MixerKind::JJ => "JxJ",
            MixerKind::SS => "SxS",
            MixerKind::TT => "TxT",
            MixerKind::ST => "SxT",
        }
    }

    /// Whether the exponential needs a dense eigendecomposition.
    fn needs_eigen(self) -> bool {
        matches!(self, MixerKind::T | MixerKind::J2S2 | MixerKind::TT | MixerKind::ST)
    }

    fn factors(self) -> &'static [Single] {
        match self {
            MixerKind::J => &[Single::J],
            MixerKind::S => &[Single::S],
            MixerKind::T => &[Single::T],
            MixerKind::J2 => &[Single::J2],
            MixerKind::S2 => &[Single::S2],
            MixerKind::J2S2 => &[Single::J2S2],
            MixerKind::JJ => &[Single::J, Single::J],
            MixerKind::SS => &[Single::S, Single::S],
            MixerKind::TT => &[Single::T, Single::T],
            MixerKind::ST => &[Single::S, Single::T],
        }
    }
}

impl fmt::Display for MixerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Single {
    J,
    S,
    T,
    J2,
    S2,
    J2S2,
}

/// A generator acting on one parameter, or on an ordered pair of parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixerSpec {
    pub kind: MixerKind,
    pub params: Vec<usize>,
}

impl MixerSpec {
    pub fn single(kind: MixerKind, param: usize) -> Self {
        Self {
            kind,
            params: vec![param],
        }
    }

    pub fn pair(kind: MixerKind, a: usize, b: usize) -> Self {
        Self {
            kind,
            params: vec![a, b],
        }
    }

    pub fn validate(&self, grid: &ParamGridSpec) -> Result<()> {
        let want = if self.kind.is_pair() { 2 } else { 1 };
        if self.params.len() != want {
            return Err(Error::InvalidArgument(format!(
                "mixer {} takes {want} parameter indices, got {}",
                self.kind,
                self.params.len()
            )));
        }
        if let Some(&p) = self.params.iter().find(|&&p| p >= grid.params()) {
            return Err(Error::InvalidArgument(format!(
                "mixer {} targets parameter {p} of {}",
                self.kind,
                grid.params()
            )));
        }
        if want == 2 && self.params[0] == self.params[1] {
            return Err(Error::InvalidArgument(format!(
                "mixer {} needs two distinct parameters",
                self.kind
            )));
        }
        if (self.kind.needs_eigen() || self.kind.is_pair()) && grid.bits() > EIGEN_BITS {
            return Err(Error::DimensionCap {
                dim: 1 << (want * grid.bits()),
                cap: 1 << (want * EIGEN_BITS),
            });
        }
        Ok(())
    }
}

impl fmt::Display for MixerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        write!(f, "{}[{}]", self.kind, idx.join(","))
    }
}

/// Every mixer the grid admits: single kinds per parameter, then pair kinds
/// per ordered pair.
pub fn default_pool(grid: &ParamGridSpec) -> Vec<MixerSpec> {
    let mut pool = Vec::new();
    for kind in MixerKind::ALL.iter().filter(|k| !k.is_pair()) {
        for p in 0..grid.params() {
            pool.push(MixerSpec::single(*kind, p));
        }
    }
    for kind in MixerKind::ALL.iter().filter(|k| k.is_pair()) {
        for a in 0..grid.params() {
            for b in 0..grid.params() {
                let symmetric = matches!(kind, MixerKind::JJ | MixerKind::SS | MixerKind::TT);
                if a != b && (a < b || !symmetric) {
                    pool.push(MixerSpec::pair(*kind, a, b));
                }
            }
        }
    }
    pool.retain(|m| m.validate(grid).is_ok());
    pool
}

/// `J = Σ_j j|j⟩⟨j|` on `bits` qubits.
pub fn position_matrix(bits: usize) -> DMatrix<Complex64> {
    let n = 1usize << bits;
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(r as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `F` with `F|j⟩ = n^{-1/2} Σ_k ω^{-jk}|k⟩`.
pub fn fourier_matrix(bits: usize) -> DMatrix<Complex64> {
    let n = 1usize << bits;
    let s = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |k, j| {
        let e = -2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
        Complex64::from_polar(s, e)
    })
}

/// `J` assembled from single-qubit `Z`s: `Σ_k 2^{k−1}(I − Z_k)` with bit `k`
/// of weight `2^k`.
pub fn position_pauli_sum(bits: usize) -> DMatrix<Complex64> {
    let n = 1usize << bits;
    let mut m = DMatrix::zeros(n, n);
    for k in 0..bits {
        let w = (k as f64 - 1.0).exp2();
        for i in 0..n {
            let z = if (i >> k) & 1 == 0 { 1.0 } else { -1.0 };
            m[(i, i)] += Complex64::new(w * (1.0 - z), 0.0);
        }
    }
    m
}

fn single_matrix(s: Single, bits: usize) -> DMatrix<Complex64> {
    let j = position_matrix(bits);
    let f = fourier_matrix(bits);
    let sm = f.adjoint() * &j * &f;
    match s {
        Single::J => j,
        Single::S => sm,
        Single::T => &j * &sm + &sm * &j,
        Single::J2 => &j * &j,
        Single::S2 => &sm * &sm,
        Single::J2S2 => &j * &j + &sm * &sm,
    }
}

/// Exact generator on `bits` qubits per parameter (pairs act on `2·bits`).
pub fn build_mixer_matrix(kind: MixerKind, bits: usize) -> Result<DMatrix<Complex64>> {
    let total = bits * kind.factors().len();
    if total > 12 || (1usize << total) > DENSE_CAP {
        return Err(Error::DimensionCap {
            dim: 1 << total.min(40),
            cap: DENSE_CAP,
        });
    }
    let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for &s in kind.factors() {
        m = m.kronecker(&single_matrix(s, bits));
    }
    Ok(m)
}

/// Change of basis into the eigenbasis of one factor, and its spectrum.
#[derive(Debug, Clone)]
enum Basis {
    Computational,
    Fourier,
    /// `V†` for `H = VΛV†`.
    Dense(UnitaryMatrix),
}

#[derive(Debug, Clone)]
struct Factor {
    basis: Basis,
    spectrum: Vec<f64>,
}

fn dense_factor(h: DMatrix<Complex64>) -> Result<Factor> {
    let eig = SymmetricEigen::new(h);
    let vt = eig.eigenvectors.adjoint();
    let n = vt.nrows();
    let data: Vec<Complex64> = (0..n * n).map(|i| vt[(i / n, i % n)]).collect();
    Ok(Factor {
        basis: Basis::Dense(UnitaryMatrix::new(n, data)?),
        spectrum: eig.eigenvalues.iter().copied().collect(),
    })
}

fn factor(s: Single, bits: usize) -> Result<Factor> {
    let n = 1usize << bits;
    let lin = || (0..n).map(|j| j as f64).collect::<Vec<_>>();
    let sq = || (0..n).map(|j| (j * j) as f64).collect::<Vec<_>>();
    Ok(match s {
        Single::J => Factor { basis: Basis::Computational, spectrum: lin() },
        Single::J2 => Factor { basis: Basis::Computational, spectrum: sq() },
        Single::S => Factor { basis: Basis::Fourier, spectrum: lin() },
        Single::S2 => Factor { basis: Basis::Fourier, spectrum: sq() },
        Single::T | Single::J2S2 => {
            if bits > EIGEN_BITS {
                return Err(Error::DimensionCap { dim: n, cap: 1 << EIGEN_BITS });
            }
            dense_factor(single_matrix(s, bits))?
        }
    })
}

/// Precomputed exponential of a mixer on a parameter grid.
#[derive(Debug, Clone)]
pub struct Mixer {
    spec: MixerSpec,
    factors: Vec<Factor>,
    bits: usize,
}

impl Mixer {
    pub fn new(spec: MixerSpec, grid: &ParamGridSpec) -> Result<Self> {
        spec.validate(grid)?;
        let factors = spec
            .kind
            .factors()
            .iter()
            .map(|&s| factor(s, grid.bits()))
            .collect::<Result<_>>()?;
        Ok(Self {
            spec,
            factors,
            bits: grid.bits(),
        })
    }

    pub fn spec(&self) -> &MixerSpec {
        &self.spec
    }

    /// `‖H‖`, the largest eigenvalue magnitude.
    pub fn norm(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.spectrum.iter().fold(0.0f64, |m, l| m.max(l.abs())))
            .product()
    }

    /// `e^{−iβH}` on the targeted parameter sub-registers.
    pub fn apply(&self, state: &mut StateVector, beta: f64) -> Result<()> {
        if beta == 0.0 {
            return Ok(());
        }
        let pq = state.layout().qubits(Register::Parameter)?;
        let d = self.bits;
        let regs: Vec<Vec<usize>> = self
            .spec
            .params
            .iter()
            .map(|&p| pq[p * d..(p + 1) * d].to_vec())
            .collect();
        for (f, q) in self.factors.iter().zip(&regs) {
            match &f.basis {
                Basis::Computational => {}
                Basis::Fourier => state.apply_qft_on(q, false)?,
                Basis::Dense(vt) => state.apply_matrix_on(q, vt)?,
            }
        }
        let all: Vec<usize> = regs.concat();
        let mask = (1usize << d) - 1;
        let k = self.factors.len();
        state.apply_diagonal_on(&all, |v| {
            let lambda: f64 = self
                .factors
                .iter()
                .enumerate()
                .map(|(i, f)| f.spectrum[(v >> ((k - 1 - i) * d)) & mask])
                .product();
            Complex64::from_polar(1.0, -beta * lambda)
        })?;
        for (f, q) in self.factors.iter().zip(&regs) {
            match &f.basis {
                Basis::Computational => {}
                Basis::Fourier => state.apply_qft_on(q, true)?,
                Basis::Dense(vt) => state.apply_matrix_on(q, &vt.adjoint())?,
            }
        }
        Ok(())
    }
}

/// `e^{−iβH}` from the dense eigendecomposition of `H`.
pub fn dense_exponential(h: &DMatrix<Complex64>, beta: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -beta * l)));
    v * phases * v.adjoint()
}

/// Applies `spec` with angle `beta`.
pub fn apply_mixer(state: &mut StateVector, grid: &ParamGridSpec, spec: &MixerSpec, beta: f64) -> Result<()> {
    Mixer::new(spec.clone(), grid)?.apply(state, beta)
}
