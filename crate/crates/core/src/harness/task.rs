use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::encoders::{
    AmplitudeEncoding, ClassifierEncoding, Direction, HadamardEncoding, LcuEncoding, LcuTerm, SwapEncoding,
};
use crate::error::{Error, Result};
use crate::oracles::{AePhaseOracle, PhaseOracle, PhaseReport};
use crate::param::{Circuit, ParamGridSpec};
use crate::sv::StateVector;

/// Largest grid enumerated by [`brute_force_landscape`].
pub const LANDSCAPE_BITS: usize = 20;

/// How a single-term VQE observable is encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VqeEncoding {
    Hadamard,
    Lcu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Problem {
    /// `C = ⟨H⟩` with `H = Σ a_i U_i`.
    Vqe {
        terms: Vec<LcuTerm>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        encoding: Option<VqeEncoding>,
    },
    /// `C = |⟨T|ψ(θ)⟩|²`.
    PureState { target: Circuit },
    /// `C = Σ_i p(y_i | x_i, θ)` read on `qubit`.
    Classifier { samples: Vec<Sample>, qubit: usize },
}

/// A training task: problem, ansatz, parameter grid and direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub problem: Problem,
    pub ansatz: Circuit,
    pub grid: ParamGridSpec,
    /// Defaults to minimize for VQE and maximize otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

impl TaskSpec {
    pub fn direction(&self) -> Direction {
        self.direction.unwrap_or(match self.problem {
            Problem::Vqe { .. } => Direction::Minimize,
            _ => Direction::Maximize,
        })
    }

    /// Amplitude encodings whose mapped costs sum to `C`.
    pub fn encodings(&self) -> Result<Vec<Arc<dyn AmplitudeEncoding>>> {
        let grid = self.grid.clone();
        let ansatz = self.ansatz.clone();
        Ok(match &self.problem {
            Problem::Vqe { terms, encoding } => {
                let kind = encoding.unwrap_or(if terms.len() == 1 && (terms[0].weight - 1.0).abs() < 1e-12 {
                    VqeEncoding::Hadamard
                } else {
                    VqeEncoding::Lcu
                });
                match kind {
                    VqeEncoding::Hadamard => {
                        if terms.len() != 1 {
                            return Err(Error::InvalidConfig(
                                "the hadamard encoding takes exactly one term".into(),
                            ));
                        }
                        vec![Arc::new(HadamardEncoding::new(grid, ansatz, terms[0].circuit.clone())?)]
                    }
                    VqeEncoding::Lcu => vec![Arc::new(LcuEncoding::new(grid, ansatz, terms.clone())?)],
                }
            }
            Problem::PureState { target } => vec![Arc::new(SwapEncoding::new(grid, ansatz, target.clone())?)],
            Problem::Classifier { samples, qubit } => {
                if samples.is_empty() {
                    return Err(Error::InvalidConfig("classifier needs at least one sample".into()));
                }
                samples
                    .iter()
                    .map(|s| {
                        Ok(Arc::new(ClassifierEncoding::new(
                            grid.clone(),
                            ansatz.clone(),
                            s.features.clone(),
                            s.label,
                            *qubit,
                        )?) as Arc<dyn AmplitudeEncoding>)
                    })
                    .collect::<Result<_>>()?
            }
        })
    }

    /// Number of system qubits `n`.
    pub fn system_qubits(&self) -> usize {
        self.ansatz.qubits
    }
}

/// Enumerated cost table with its optimal set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub costs: Vec<f64>,
    pub direction: Direction,
    pub best: f64,
    pub optimal: Vec<usize>,
}

impl Landscape {
    /// `s`, the number of optimal configurations.
    pub fn solutions(&self) -> usize {
        self.optimal.len()
    }

    pub fn size(&self) -> usize {
        self.costs.len()
    }
}

/// Simulates every configuration on its own and scores it exactly.
pub fn brute_force_landscape(task: &TaskSpec) -> Result<Landscape> {
    let bits = task.grid.total_bits();
    if bits > LANDSCAPE_BITS {
        return Err(Error::GridTooLarge {
            bits,
            limit: LANDSCAPE_BITS,
        });
    }
    let encodings = task.encodings()?;
    landscape_of(&encodings, task.direction())
}

pub(crate) fn landscape_of(encodings: &[Arc<dyn AmplitudeEncoding>], direction: Direction) -> Result<Landscape> {
    let grid = encodings[0].grid();
    let costs = (0..grid.size())
        .map(|j| {
            let angles = grid.angles(j);
            encodings.iter().try_fold(0.0, |acc, e| {
                Ok::<_, Error>(acc + e.cost_map().cost(e.reference_value(&angles)?))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let optimal = crate::acqaoa::optimal_set(&costs, direction);
    Ok(Landscape {
        best: costs[optimal[0]],
        costs,
        direction,
        optimal,
    })
}

/// Per-sample phase oracles applied in sequence, each fully uncomputed,
/// for a net phase `e^{−iγΣ_i L_i(θ)}`.
pub fn classifier_phase_accumulate(
    state: &mut StateVector,
    task: &TaskSpec,
    gamma: f64,
    amplitude_bits: usize,
) -> Result<PhaseReport> {
    if !matches!(task.problem, Problem::Classifier { .. }) {
        return Err(Error::InvalidArgument("not a classifier task".into()));
    }
    let oracle = AePhaseOracle::new(task.encodings()?, amplitude_bits)?;
    if state.layout_arc().as_ref() != oracle.layout().as_ref() {
        return Err(Error::LayoutMismatch);
    }
    oracle.apply(state, gamma)
}

/// Total qubits for training: system, parameters, one test ancilla, the
/// `⌈log₂log₂(1/ε)⌉` precision term and the amplitude register if used.
pub fn qubit_count(n: usize, d: usize, r: usize, eps: f64, amplitude_bits: Option<usize>) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {eps} must lie in (0, 1)")));
    }
    let loglog = (1.0 / eps).log2().log2().ceil().max(0.0) as usize;
    Ok(n + d * r + 1 + loglog + amplitude_bits.unwrap_or(0))
}
