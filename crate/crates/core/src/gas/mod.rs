//! Grover adaptive search over the parameter register.

mod resources;

use std::f64::consts::PI;
use std::sync::Arc;

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

pub use resources::{gas_resources, GasResources};

use crate::encoders::{AmplitudeEncoding, Direction};
use crate::error::{Error, Result};
use crate::oracles::ThresholdOracle;
use crate::sv::{Control, GateOp, Register, StateVector};

/// `D = H^{⊗n}(2|0⟩⟨0| − I)H^{⊗n}` on the parameter register.
pub fn apply_diffusion(state: &mut StateVector) -> Result<()> {
    let qubits = state.layout().qubits(Register::Parameter)?;
    state.hadamard_register(Register::Parameter)?;
    let controls: Vec<Control> = qubits.into_iter().map(Control::anti).collect();
    state.apply(&GateOp::phase(PI).with_controls(&controls))?;
    state.apply(&GateOp::phase(PI))?;
    state.hadamard_register(Register::Parameter)
}

/// `m` rounds of oracle then diffusion.
pub fn grover_iterate(
    state: &mut StateVector,
    oracle: &dyn ThresholdOracle,
    threshold: f64,
    m: u64,
) -> Result<()> {
    for _ in 0..m {
        oracle.apply(state, threshold)?;
        apply_diffusion(state)?;
    }
    Ok(())
}

/// How a measured configuration is scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum EvalMode {
    Exact,
    /// Binomial test-qubit statistics; `shots` defaults to `⌈1/ε₂⌉`.
    Sampled {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shots: Option<u64>,
    },
}

/// Scores a single configuration.
pub trait CostEvaluator: Send + Sync {
    fn name(&self) -> &'static str;

    fn evaluate(&self, j: usize, rng: &mut ChaCha8Rng) -> Result<f64>;
}

/// Exact lookup in an enumerated cost table.
#[derive(Debug, Clone)]
pub struct TableEvaluator {
    costs: Arc<[f64]>,
}

impl TableEvaluator {
    pub fn new(costs: impl Into<Arc<[f64]>>) -> Self {
        Self { costs: costs.into() }
    }
}

impl CostEvaluator for TableEvaluator {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn evaluate(&self, j: usize, _rng: &mut ChaCha8Rng) -> Result<f64> {
        self.costs
            .get(j)
            .copied()
            .ok_or(Error::IndexOutOfRange { index: j, total: self.costs.len() })
    }
}

/// Shot-sampled estimate summed over the encodings.
#[derive(Debug, Clone)]
pub struct SampledEvaluator {
    encodings: Vec<Arc<dyn AmplitudeEncoding>>,
    shots: u64,
}

impl SampledEvaluator {
    pub fn new(encodings: Vec<Arc<dyn AmplitudeEncoding>>, shots: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidConfig("shot count must be positive".into()));
        }
        Ok(Self { encodings, shots })
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }
}

impl CostEvaluator for SampledEvaluator {
    fn name(&self) -> &'static str {
        "sampled"
    }

    fn evaluate(&self, j: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
        let mut total = 0.0;
        for enc in &self.encodings {
            let e = enc.reference_value(&enc.grid().angles(j))?;
            let sign = enc.flag_sign();
            let p1 = ((1.0 - sign * e) / 2.0).clamp(0.0, 1.0);
            let ones = Binomial::new(self.shots, p1)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .sample(rng);
            let est = sign * (1.0 - 2.0 * ones as f64 / self.shots as f64);
            total += enc.cost_map().cost(est);
        }
        Ok(total)
    }
}

fn default_lambda() -> f64 {
    8.0 / 7.0
}

/// Search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasConfig {
    #[serde(default)]
    pub seed: u64,
    /// Growth factor of the iteration bound.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Oracle-call budget; `20√N` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_oracle_calls: Option<u64>,
    /// Stop as soon as a cost at least this good is accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_cost: Option<f64>,
    #[serde(default = "default_eval")]
    pub eval: EvalMode,
}

fn default_eval() -> EvalMode {
    EvalMode::Exact
}

impl Default for GasConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            lambda: default_lambda(),
            max_oracle_calls: None,
            target_cost: None,
            eval: EvalMode::Exact,
        }
    }
}

impl GasConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda = {} must exceed 1", self.lambda)));
        }
        if self.max_oracle_calls == Some(0) {
            return Err(Error::InvalidConfig("oracle-call budget must be positive".into()));
        }
        if let EvalMode::Sampled { shots: Some(0) } = self.eval {
            return Err(Error::InvalidConfig("shot count must be positive".into()));
        }
        Ok(())
    }

    pub fn budget(&self, n: usize) -> u64 {
        self.max_oracle_calls
            .unwrap_or_else(|| (20.0 * (n as f64).sqrt()).ceil() as u64)
    }
}

/// Per-call and per-evaluation unit costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterModel {
    /// Controlled-QNN runs per oracle call.
    pub cqnn_per_call: u64,
    /// QNN runs per cost evaluation.
    pub qnn_per_eval: u64,
}

/// One measure-and-evaluate round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasStep {
    pub step: usize,
    /// Grover iterations before measuring.
    pub m: u64,
    pub measured: usize,
    pub cost: f64,
    pub accepted: bool,
    pub threshold: f64,
    pub oracle_calls: u64,
    pub cqnn_runs: u64,
    pub qnn_runs: u64,
    pub measurements: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub steps: Vec<GasStep>,
    pub best_index: usize,
    pub best_cost: f64,
    /// Oracle calls spent when the final best was accepted.
    pub calls_to_best: u64,
    pub oracle_calls: u64,
    pub cqnn_runs: u64,
    pub qnn_runs: u64,
    pub measurements: u64,
    pub stop: StopReason,
    /// A target was set and not reached.
    pub exhausted: bool,
}

impl RunRecord {
    /// Thresholds accepted over the run, in order.
    pub fn thresholds(&self) -> Vec<f64> {
        self.steps.iter().filter(|s| s.accepted).map(|s| s.cost).collect()
    }
}

fn parameter_uniform(oracle: &dyn ThresholdOracle) -> Result<StateVector> {
    let mut s = StateVector::zero(oracle.layout());
    s.hadamard_register(Register::Parameter)?;
    Ok(s)
}

/// Dürr–Høyer minimum finding with a growing random iteration count.
pub fn gas_run(
    oracle: &dyn ThresholdOracle,
    evaluator: &dyn CostEvaluator,
    direction: Direction,
    counters: CounterModel,
    cfg: &GasConfig,
) -> Result<RunRecord> {
    cfg.validate()?;
    let layout = oracle.layout();
    let n = 1usize << layout.width(Register::Parameter)?;
    let budget = cfg.budget(n);
    let sqrt_n = (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let reached = |c: f64| cfg.target_cost.is_some_and(|t| !direction.better(t, c));

    let mut steps = Vec::new();
    let (mut calls, mut evals) = (0u64, 0u64);
    let record_step = |steps: &mut Vec<GasStep>, m, j, c, accepted, threshold, calls, evals| {
        steps.push(GasStep {
            step: steps.len(),
            m,
            measured: j,
            cost: c,
            accepted,
            threshold,
            oracle_calls: calls,
            cqnn_runs: calls * counters.cqnn_per_call,
            qnn_runs: evals * counters.qnn_per_eval,
            measurements: evals,
        });
    };

    let first = rng.gen_range(0..n);
    let mut best_cost = evaluator.evaluate(first, &mut rng)?;
    let mut best_index = first;
    evals += 1;
    record_step(&mut steps, 0, first, best_cost, true, best_cost, calls, evals);
    let mut calls_to_best = 0;
    let mut m_max = 1.0f64;

    let stop = loop {
        if reached(best_cost) {
            break StopReason::Target;
        }
        let m = rng.gen_range(0..m_max.ceil() as u64);
        if calls + m > budget || (m == 0 && calls >= budget) {
            break StopReason::Budget;
        }
        let mut state = parameter_uniform(oracle)?;
        grover_iterate(&mut state, oracle, best_cost, m)?;
        calls += m;
        let j = state.measure_register(Register::Parameter, &mut rng)?;
        let c = evaluator.evaluate(j, &mut rng)?;
        evals += 1;
        let accepted = direction.better(c, best_cost);
        if accepted {
            best_cost = c;
            best_index = j;
            calls_to_best = calls;
            m_max = 1.0;
        } else {
            m_max = (cfg.lambda * m_max).min(sqrt_n);
        }
        record_step(&mut steps, m, j, c, accepted, best_cost, calls, evals);
    };

    Ok(RunRecord {
        seed: cfg.seed,
        steps,
        best_index,
        best_cost,
        calls_to_best,
        oracle_calls: calls,
        cqnn_runs: calls * counters.cqnn_per_call,
        qnn_runs: evals * counters.qnn_per_eval,
        measurements: evals,
        stop,
        exhausted: stop == StopReason::Budget && cfg.target_cost.is_some(),
    })
}
