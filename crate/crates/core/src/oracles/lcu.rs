use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::{PhaseOracle, PhaseReport};
use crate::encoders::{
    apply_grover_power, encoding_layout, householder_prep, AmplitudeEncoding, GroverVariant,
};
use crate::error::{Error, Result};
use crate::sv::{Axis, Control, GateOp, QubitLayout, Register, StateVector, UnitaryMatrix};

/// Truncated expansion `e^{i(1−cos ψ)/2} ≈ Σ_{m=−M}^{M} β_m e^{imψ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuSeriesSpec {
    order: usize,
    coeffs: Vec<Complex64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl LcuSeriesSpec {
    pub fn new(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidArgument("series order must be at least 1".into()));
        }
        let i = Complex64::new(0.0, 1.0);
        let mut coeffs = Vec::with_capacity(2 * order + 1);
        for m in -(order as i64)..=order as i64 {
            let mut beta = Complex64::new(0.0, 0.0);
            let mut fact = (1..=m.unsigned_abs()).fold(1.0, |a, x| a * x as f64);
            for k in m.unsigned_abs() as usize..=order {
                if k > m.unsigned_abs() as usize {
                    fact *= k as f64;
                }
                let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let c = binomial(2 * k, (k as i64 - m) as usize) * sign / (fact * 4f64.powi(k as i32));
                beta += i.powu(k as u32) * c;
            }
            coeffs.push(beta);
        }
        Ok(Self { order, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `β_m` for `m ∈ [−M, M]`.
    pub fn coefficient(&self, m: i64) -> Complex64 {
        self.coeffs[(m + self.order as i64) as usize]
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `s = Σ|β_m|`.
    pub fn one_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// `Σ β_m x^m`.
    pub fn evaluate(&self, x: Complex64) -> Complex64 {
        (-(self.order as i64)..=self.order as i64)
            .map(|m| self.coefficient(m) * x.powi(m as i32))
            .sum()
    }

    /// `|Σ β_m e^{imψ} − e^{i(1−cos ψ)/2}|`.
    pub fn error_at(&self, psi: f64) -> f64 {
        let exact = Complex64::from_polar(1.0, (1.0 - psi.cos()) / 2.0);
        (self.evaluate(Complex64::from_polar(1.0, psi)) - exact).norm()
    }

    /// Width of the series index register, `⌈log₂(2M+1)⌉`.
    pub fn index_bits(&self) -> usize {
        (2 * self.order + 1).next_power_of_two().trailing_zeros() as usize
    }
}

/// Phase oracle from the series in the walk `W = −G*`, whose per-block
/// eigenphases satisfy `cos ψ = E`. The block `⟨0|·|0⟩` of the select
/// construction approximates `e^{-i(E−1)/2}/s`; a flag rotation lowers the
/// success amplitude to exactly `1/2` and one round of oblivious amplitude
/// amplification lifts it to one.
#[derive(Debug, Clone)]
pub struct LcuPhaseOracle {
    encodings: Vec<Arc<dyn AmplitudeEncoding>>,
    series: LcuSeriesSpec,
    layout: Arc<QubitLayout>,
    prep: UnitaryMatrix,
    phases: Vec<f64>,
    flag_angle: f64,
}

impl LcuPhaseOracle {
    pub fn new(encodings: Vec<Arc<dyn AmplitudeEncoding>>, series: LcuSeriesSpec) -> Result<Self> {
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
        let w = series.index_bits();
        let layout = encoding_layout(
            first.as_ref(),
            0,
            &[(Register::SeriesIndex, w), (Register::SeriesFlag, 1)],
        )?;
        let s = series.one_norm();
        if s >= 2.0 {
            return Err(Error::Unsupported(format!(
                "series one-norm {s} leaves no room for a single amplification round"
            )));
        }
        let amps: Vec<f64> = (0..1usize << w)
            .map(|i| series.coeffs.get(i).map_or(0.0, |b| (b.norm() / s).sqrt()))
            .collect();
        let phases = (0..1usize << w)
            .map(|i| series.coeffs.get(i).map_or(0.0, |b| b.arg()))
            .collect();
        Ok(Self {
            encodings,
            prep: householder_prep(&amps),
            phases,
            flag_angle: 2.0 * (s / 2.0).acos(),
            series,
            layout,
        })
    }

    pub fn series(&self) -> &LcuSeriesSpec {
        &self.series
    }

    /// Phase strength in task-cost units realized by one application.
    pub fn unit_gamma(&self) -> f64 {
        1.0 / (2.0 * self.encodings[0].cost_map().scale)
    }

    /// `W^p = (−1)^p G*^p`, conditioned on `controls`.
    fn walk(&self, state: &mut StateVector, enc: &dyn AmplitudeEncoding, p: i64, controls: &[Control]) -> Result<()> {
        apply_grover_power(state, enc, GroverVariant::GStar, p, controls)?;
        if p.rem_euclid(2) == 1 {
            state.apply(&GateOp::phase(PI).with_controls(controls))?;
        }
        Ok(())
    }

    fn select(&self, state: &mut StateVector, enc: &dyn AmplitudeEncoding, adjoint: bool) -> Result<()> {
        let idx = state.layout().range(Register::SeriesIndex)?;
        let m = self.series.order as i64;
        let sign = if adjoint { -1.0 } else { 1.0 };
        if !adjoint {
            self.walk(state, enc, -m, &[])?;
            for (b, q) in idx.clone().enumerate() {
                self.walk(state, enc, 1 << b, &[Control::on(q)])?;
            }
        } else {
            for (b, q) in idx.clone().enumerate().rev() {
                self.walk(state, enc, -(1 << b), &[Control::on(q)])?;
            }
            self.walk(state, enc, m, &[])?;
        }
        state.apply_register_diagonal(Register::SeriesIndex, |i| {
            Complex64::from_polar(1.0, sign * self.phases[i])
        })
    }

    /// `Q = Ry_flag ⊗ V† Sel V`.
    fn apply_q(&self, state: &mut StateVector, enc: &dyn AmplitudeEncoding, adjoint: bool) -> Result<()> {
        let idx = state.layout().qubits(Register::SeriesIndex)?;
        let flag = state.layout().qubit(Register::SeriesFlag, 0)?;
        let v = GateOp::matrix(idx.clone(), self.prep.clone())?;
        let angle = if adjoint { -self.flag_angle } else { self.flag_angle };
        if !adjoint {
            state.apply(&GateOp::rotation(Axis::Y, angle, flag))?;
        }
        state.apply(&v)?;
        self.select(state, enc, adjoint)?;
        state.apply(&v.adjoint())?;
        if adjoint {
            state.apply(&GateOp::rotation(Axis::Y, angle, flag))?;
        }
        Ok(())
    }

    /// `I − 2Π` with `Π` the projector on index and flag all zero.
    fn reflect(&self, state: &mut StateVector) -> Result<()> {
        let mut qubits = state.layout().qubits(Register::SeriesIndex)?;
        qubits.push(state.layout().qubit(Register::SeriesFlag, 0)?);
        let controls: Vec<Control> = qubits.into_iter().map(Control::anti).collect();
        state.apply(&GateOp::phase(PI).with_controls(&controls))
    }

    /// One application of `e^{-i(E−1)/2}` for every encoding.
    pub fn apply_series(&self, state: &mut StateVector) -> Result<()> {
        for enc in &self.encodings {
            let enc = enc.as_ref();
            self.apply_q(state, enc, false)?;
            self.reflect(state)?;
            self.apply_q(state, enc, true)?;
            self.reflect(state)?;
            self.apply_q(state, enc, false)?;
            state.apply(&GateOp::phase(PI))?;
        }
        Ok(())
    }
}

impl PhaseOracle for LcuPhaseOracle {
    fn name(&self) -> &'static str {
        "lcu"
    }

    fn layout(&self) -> Arc<QubitLayout> {
        self.layout.clone()
    }

    /// `gamma` must be a non-negative integer multiple of [`Self::unit_gamma`].
    fn apply(&self, state: &mut StateVector, gamma: f64) -> Result<PhaseReport> {
        let unit = self.unit_gamma();
        let reps = (gamma / unit).round();
        if reps < 0.0 || (reps * unit - gamma).abs() > 1e-9 {
            return Err(Error::Unsupported(format!(
                "the series oracle realizes gamma in multiples of {unit}, got {gamma}"
            )));
        }
        for _ in 0..reps as usize {
            self.apply_series(state)?;
        }
        let others: Vec<Register> = self
            .layout
            .registers()
            .map(|(r, _)| r)
            .filter(|r| *r != Register::Parameter)
            .collect();
        Ok(PhaseReport {
            ancilla_zero_probability: state.zero_probability(&others),
        })
    }
}
