//! Amplitude encodings of circuit costs and the Grover operators built on them.
//!
//! Every encoding prepares, for each parameter configuration `j`, a state
//! `φ_j = U|0⟩|j⟩` on its work registers. With the test reflection
//! `C₁ = ±Z` on one designated qubit the encoded value is `E_j = ⟨φ_j|C₁|φ_j⟩`,
//! so that `E_j = −cos 2θ_j` and the Grover operator `G = U C₂ U† C₁` has the
//! per-block eigenphases `±2θ_j`.

mod grover;
mod kinds;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use grover::{
    apply_grover_op, apply_grover_power, block_eigenphases, build_flip_zero, GroverVariant,
};
pub(crate) use kinds::householder_prep;
pub use kinds::{ClassifierEncoding, HadamardEncoding, LcuEncoding, LcuTerm, SwapEncoding};

use crate::error::Result;
use crate::param::ParamGridSpec;
use crate::sv::{Control, QubitLayout, Register, StateVector};

/// Optimization direction of a cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Minimize => a < b,
            Direction::Maximize => a > b,
        }
    }
}

/// Affine map from the encoded value `E` to the task cost, `C = scale·E + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostMap {
    pub scale: f64,
    pub offset: f64,
}

impl CostMap {
    pub const IDENTITY: CostMap = CostMap {
        scale: 1.0,
        offset: 0.0,
    };

    pub fn cost(&self, encoded: f64) -> f64 {
        self.scale * encoded + self.offset
    }

    pub fn encoded(&self, cost: f64) -> f64 {
        (cost - self.offset) / self.scale
    }
}

/// State preparation `U` whose test-qubit statistics encode a cost.
pub trait AmplitudeEncoding: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn grid(&self) -> &ParamGridSpec;

    /// Work registers in allocation order. The parameter register is not included.
    fn work_registers(&self) -> Vec<(Register, usize)>;

    /// Global index of the qubit the test reflection acts on.
    fn test_qubit(&self, layout: &QubitLayout) -> Result<usize>;

    /// Sign of the test reflection, `C₁ = sign·Z`.
    fn flag_sign(&self) -> f64 {
        1.0
    }

    /// Applies `U` (or `U†`), conditioned on `controls`.
    fn prepare(&self, state: &mut StateVector, adjoint: bool, controls: &[Control]) -> Result<()>;

    fn cost_map(&self) -> CostMap {
        CostMap::IDENTITY
    }

    /// Admissible range of the folded angle `θ`.
    fn theta_range(&self) -> (f64, f64) {
        (0.0, std::f64::consts::FRAC_PI_2)
    }

    /// `E` at fixed angles, computed by simulating the circuits on their own.
    fn reference_value(&self, angles: &[f64]) -> Result<f64>;
}

/// Work registers of an encoding, for the flip-zero reflection.
pub fn work_register_names(enc: &dyn AmplitudeEncoding) -> Vec<Register> {
    enc.work_registers().into_iter().map(|(r, _)| r).collect()
}

/// Layout with the encoding's work registers, the parameter register, an
/// amplitude register of `amplitude_bits` (omitted when zero) and `extra`.
pub fn encoding_layout(
    enc: &dyn AmplitudeEncoding,
    amplitude_bits: usize,
    extra: &[(Register, usize)],
) -> Result<Arc<QubitLayout>> {
    let mut b = QubitLayout::builder();
    for (r, w) in enc.work_registers() {
        b = b.register(r, w);
    }
    b = b.register(Register::Parameter, enc.grid().total_bits());
    if amplitude_bits > 0 {
        b = b.register(Register::Amplitude, amplitude_bits);
    }
    for &(r, w) in extra {
        b = b.register(r, w);
    }
    b.build().map(Arc::new)
}

/// State after `U` together with the location of the test qubit.
#[derive(Debug, Clone)]
pub struct EncodedAmplitudeState {
    pub state: StateVector,
    pub test_qubit: usize,
    pub flag_sign: f64,
}

impl EncodedAmplitudeState {
    /// Applies `U` to `state`.
    pub fn encode(enc: &dyn AmplitudeEncoding, mut state: StateVector) -> Result<Self> {
        enc.prepare(&mut state, false, &[])?;
        let test_qubit = enc.test_qubit(state.layout())?;
        Ok(Self {
            state,
            test_qubit,
            flag_sign: enc.flag_sign(),
        })
    }

    /// `P(test qubit = 1 | parameter = j)`.
    pub fn test_one_probability(&self, j: usize) -> Result<f64> {
        let layout = self.state.layout();
        let range = layout.range(Register::Parameter)?;
        let mask = ((1usize << range.len()) - 1) << range.start;
        let jbits = j << range.start;
        let tbit = 1usize << self.test_qubit;
        let block = self.state.probability_where(|i| i & mask == jbits);
        let one = self
            .state
            .probability_where(|i| i & mask == jbits && i & tbit != 0);
        Ok(if block > 0.0 { one / block } else { 0.0 })
    }

    /// Encoded value `E_j = ⟨C₁⟩` in block `j`.
    pub fn encoded_value(&self, j: usize) -> Result<f64> {
        let p1 = self.test_one_probability(j)?;
        Ok(self.flag_sign * (1.0 - 2.0 * p1))
    }
}

/// Angle `θ ∈ [0, π/2]` with `E = −cos 2θ`.
pub fn theta_of(encoded: f64) -> f64 {
    (-encoded.clamp(-1.0, 1.0)).acos() / 2.0
}
