use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::task::{Landscape, TaskSpec};
use crate::acqaoa::{default_pool, hyperparam_optimize, qaoa_run, MixerSpec, QaoaConfig, QaoaProblem};
use crate::encoders::{AmplitudeEncoding, Direction};
use crate::error::{Error, Result};
use crate::gas::{gas_run, CostEvaluator, CounterModel, EvalMode, GasConfig, SampledEvaluator, TableEvaluator};
use crate::sv::sample_index;
use crate::oracles::{
    phase_oracle, GroverOracle, IdealPhaseOracle, IdealThresholdOracle, LcuPhaseOracle, LcuSeriesSpec,
    OracleConfig, PhaseMethod, PhaseOracle, PhaseOracleInputs, ThresholdOracle,
};

/// Everything an optimizer needs about one experiment.
pub struct RunContext {
    pub task: TaskSpec,
    pub encodings: Vec<Arc<dyn AmplitudeEncoding>>,
    pub landscape: Landscape,
    pub oracle: OracleConfig,
    pub mode: EvalMode,
}

impl RunContext {
    pub fn direction(&self) -> Direction {
        self.task.direction()
    }

    fn counters(&self) -> CounterModel {
        CounterModel {
            cqnn_per_call: self.oracle.qnn_runs_per_call(),
            qnn_per_eval: (1.0 / self.oracle.eps2()).ceil() as u64,
        }
    }
}

/// One CSV summary row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub seed: u64,
    pub optimizer: String,
    pub best_index: usize,
    pub best_bitstring: String,
    pub best_cost: f64,
    pub found_optimum: bool,
    pub success_probability: Option<f64>,
    pub oracle_calls: u64,
    pub cqnn_runs: u64,
    pub qnn_runs: u64,
    pub measurements: u64,
    pub exhausted: bool,
}

/// Output of one seeded run.
pub struct SeedResult {
    /// One JSON object per line of the run-record file.
    pub records: Vec<Value>,
    pub summary: SummaryRow,
    /// Extra files as (name, contents).
    pub artifacts: Vec<(String, String)>,
}

/// A configured optimizer bound to an experiment, run once per seed.
pub trait Trial: Send + Sync {
    fn run(&self, seed: u64) -> Result<SeedResult>;
}

/// A registered optimizer.
pub trait Optimizer: Send + Sync {
    fn name(&self) -> &'static str;

    /// Builds oracles and checks settings against the experiment.
    fn prepare(&self, ctx: Arc<RunContext>) -> Result<Box<dyn Trial>>;
}

type OptimizerFactory = fn(Value) -> Result<Box<dyn Optimizer>>;

const OPTIMIZERS: &[(&str, OptimizerFactory)] = &[("gas", make_gas), ("acqaoa", make_acqaoa)];

pub fn optimizer_names() -> Vec<&'static str> {
    OPTIMIZERS.iter().map(|(n, _)| *n).collect()
}

/// Builds the optimizer named by the `kind` field of `settings`; the other
/// fields are its settings.
pub fn optimizer(settings: &Value) -> Result<Box<dyn Optimizer>> {
    let mut obj = settings
        .as_object()
        .cloned()
        .ok_or_else(|| Error::InvalidConfig("optimizer must be an object".into()))?;
    let kind = obj
        .remove("kind")
        .and_then(|k| k.as_str().map(str::to_owned))
        .ok_or_else(|| Error::InvalidConfig("optimizer needs a string 'kind'".into()))?;
    let (_, factory) = OPTIMIZERS
        .iter()
        .find(|(n, _)| *n == kind)
        .ok_or_else(|| {
            Error::InvalidConfig(format!("unknown optimizer '{kind}', expected one of {:?}", optimizer_names()))
        })?;
    factory(Value::Object(obj))
}

fn settings<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::InvalidConfig(format!("{what} settings: {e}")))
}

type ThresholdFactory = fn(&RunContext) -> Result<Box<dyn ThresholdOracle>>;

const THRESHOLD_ORACLES: &[(&str, ThresholdFactory)] = &[("ae", make_grover), ("ideal", make_ideal_threshold)];

pub fn threshold_oracle_names() -> Vec<&'static str> {
    THRESHOLD_ORACLES.iter().map(|(n, _)| *n).collect()
}

pub fn threshold_oracle(name: &str, ctx: &RunContext) -> Result<Box<dyn ThresholdOracle>> {
    THRESHOLD_ORACLES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown threshold oracle '{name}'")))
        .and_then(|(_, f)| f(ctx))
}

fn make_grover(ctx: &RunContext) -> Result<Box<dyn ThresholdOracle>> {
    if ctx.encodings.len() != 1 {
        return Err(Error::Unsupported(format!(
            "the simulated threshold oracle compares a single encoded value; this task has {} (use the ideal oracle)",
            ctx.encodings.len()
        )));
    }
    Ok(Box::new(GroverOracle::new(
        ctx.encodings[0].clone(),
        ctx.direction(),
        ctx.oracle.amplitude_bits(),
    )?))
}

fn make_ideal_threshold(ctx: &RunContext) -> Result<Box<dyn ThresholdOracle>> {
    Ok(Box::new(IdealThresholdOracle::new(ctx.landscape.costs.clone(), ctx.direction())?))
}

fn found(ctx: &RunContext, j: usize) -> bool {
    ctx.landscape.optimal.contains(&j)
}

fn bitstring(ctx: &RunContext, j: usize) -> String {
    crate::param::Bitstring::from_value(j, ctx.task.grid.total_bits()).to_string()
}

fn default_threshold_oracle() -> String {
    "ae".into()
}

fn default_lambda() -> f64 {
    8.0 / 7.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GasSettings {
    #[serde(default = "default_lambda")]
    lambda: f64,
    #[serde(default)]
    max_oracle_calls: Option<u64>,
    #[serde(default)]
    target_cost: Option<f64>,
    #[serde(default = "default_threshold_oracle")]
    threshold_oracle: String,
}

struct Gas(GasSettings);

fn make_gas(v: Value) -> Result<Box<dyn Optimizer>> {
    Ok(Box::new(Gas(settings(v, "gas")?)))
}

struct GasTrial {
    ctx: Arc<RunContext>,
    oracle: Box<dyn ThresholdOracle>,
    evaluator: Box<dyn CostEvaluator>,
    base: GasConfig,
}

impl Optimizer for Gas {
    fn name(&self) -> &'static str {
        "gas"
    }

    fn prepare(&self, ctx: Arc<RunContext>) -> Result<Box<dyn Trial>> {
        let base = GasConfig {
            seed: 0,
            lambda: self.0.lambda,
            max_oracle_calls: self.0.max_oracle_calls,
            target_cost: self.0.target_cost,
            eval: ctx.mode,
        };
        base.validate()?;
        let oracle = threshold_oracle(&self.0.threshold_oracle, &ctx)?;
        let evaluator: Box<dyn CostEvaluator> = match ctx.mode {
            EvalMode::Exact => Box::new(TableEvaluator::new(ctx.landscape.costs.clone())),
            EvalMode::Sampled { shots } => {
                let shots = shots.unwrap_or((1.0 / ctx.oracle.eps2()).ceil() as u64);
                Box::new(SampledEvaluator::new(ctx.encodings.clone(), shots)?)
            }
        };
        Ok(Box::new(GasTrial {
            ctx,
            oracle,
            evaluator,
            base,
        }))
    }
}

impl Trial for GasTrial {
    fn run(&self, seed: u64) -> Result<SeedResult> {
        let cfg = GasConfig { seed, ..self.base.clone() };
        let ctx = &self.ctx;
        let rec = gas_run(self.oracle.as_ref(), self.evaluator.as_ref(), ctx.direction(), ctx.counters(), &cfg)?;
        let records = rec
            .steps
            .iter()
            .map(|s| {
                let mut v = serde_json::to_value(s).expect("step serializes");
                v.as_object_mut()
                    .expect("step is an object")
                    .insert("seed".into(), json!(seed));
                v
            })
            .collect();
        let summary = SummaryRow {
            seed,
            optimizer: "gas".into(),
            best_index: rec.best_index,
            best_bitstring: bitstring(ctx, rec.best_index),
            best_cost: ctx.landscape.costs[rec.best_index],
            found_optimum: found(ctx, rec.best_index),
            success_probability: None,
            oracle_calls: rec.oracle_calls,
            cqnn_runs: rec.cqnn_runs,
            qnn_runs: rec.qnn_runs,
            measurements: rec.measurements,
            exhausted: rec.exhausted,
        };
        Ok(SeedResult {
            records,
            summary,
            artifacts: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AcqaoaSettings {
    #[serde(default)]
    pool: Option<Vec<MixerSpec>>,
    layers: usize,
    #[serde(default)]
    budget: Option<usize>,
    #[serde(default)]
    gamma0: Option<f64>,
    #[serde(default)]
    initial_step: Option<f64>,
    #[serde(default)]
    step_floor: Option<f64>,
    #[serde(default)]
    restarts: Option<usize>,
    #[serde(default)]
    adaptive: Option<bool>,
    /// Measurements of the final state; the best-cost outcome is reported.
    #[serde(default = "default_readout")]
    readout_shots: u64,
}

fn default_readout() -> u64 {
    32
}

struct Acqaoa(AcqaoaSettings);

fn make_acqaoa(v: Value) -> Result<Box<dyn Optimizer>> {
    Ok(Box::new(Acqaoa(settings(v, "acqaoa")?)))
}

struct AcqaoaTrial {
    ctx: Arc<RunContext>,
    train: QaoaProblem,
    replay: QaoaProblem,
    cfg: QaoaConfig,
    readout_shots: u64,
}

impl Optimizer for Acqaoa {
    fn name(&self) -> &'static str {
        "acqaoa"
    }

    fn prepare(&self, ctx: Arc<RunContext>) -> Result<Box<dyn Trial>> {
        if self.0.readout_shots == 0 {
            return Err(Error::InvalidConfig("readout_shots must be positive".into()));
        }
        if ctx.mode != EvalMode::Exact {
            return Err(Error::InvalidConfig(
                "acqaoa trains on the exact expectation; sampled mode applies to gas only".into(),
            ));
        }
        let t = &self.0;
        let mut cfg = QaoaConfig::new(t.layers);
        cfg.budget = t.budget.unwrap_or(cfg.budget);
        cfg.gamma0 = t.gamma0.unwrap_or(cfg.gamma0);
        cfg.initial_step = t.initial_step.unwrap_or(cfg.initial_step);
        cfg.step_floor = t.step_floor.unwrap_or(cfg.step_floor);
        cfg.restarts = t.restarts.unwrap_or(cfg.restarts);
        cfg.adaptive = t.adaptive.unwrap_or(cfg.adaptive);
        let grid = ctx.task.grid.clone();
        let pool = self.0.pool.clone().unwrap_or_else(|| default_pool(&grid));
        let oracle: Arc<dyn PhaseOracle> = match ctx.oracle.method {
            PhaseMethod::Lcu => {
                let lcu = LcuPhaseOracle::new(ctx.encodings.clone(), LcuSeriesSpec::new(ctx.oracle.series_order)?)?;
                cfg.gamma_unit = Some(lcu.unit_gamma());
                cfg.gamma0 = (cfg.gamma0 / lcu.unit_gamma()).round().max(1.0) * lcu.unit_gamma();
                Arc::new(lcu)
            }
            m => Arc::from(phase_oracle(
                m.name(),
                &PhaseOracleInputs {
                    encodings: &ctx.encodings,
                    costs: &ctx.landscape.costs,
                    config: &ctx.oracle,
                },
            )?),
        };
        cfg.validate()?;
        let ideal: Arc<dyn PhaseOracle> = Arc::new(IdealPhaseOracle::new(ctx.landscape.costs.clone())?);
        let costs = ctx.landscape.costs.clone();
        let train = QaoaProblem::new(ideal, grid.clone(), costs.clone(), ctx.direction(), &pool)?;
        let replay = QaoaProblem::new(oracle, grid, costs, ctx.direction(), &pool)?;
        Ok(Box::new(AcqaoaTrial {
            ctx,
            train,
            replay,
            cfg,
            readout_shots: self.0.readout_shots,
        }))
    }
}

impl Trial for AcqaoaTrial {
    fn run(&self, seed: u64) -> Result<SeedResult> {
        let cfg = QaoaConfig { seed, ..self.cfg.clone() };
        let trained = hyperparam_optimize(&self.train, &cfg)?;
        let (_, out) = qaoa_run(&self.replay, &trained.schedule)?;
        let ctx = &self.ctx;
        let records = trained
            .schedule
            .layers
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                json!({
                    "seed": seed,
                    "layer": l,
                    "gamma": layer.gamma,
                    "mixer": layer.mixer,
                    "beta": layer.beta,
                    "expected_cost": trained.expected_costs[l + 1],
                })
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let direction = ctx.direction();
        let costs = &ctx.landscape.costs;
        let best_index = (0..self.readout_shots)
            .map(|_| sample_index(&out.marginal, &mut rng))
            .reduce(|b, j| if direction.better(costs[j], costs[b]) { j } else { b })
            .expect("at least one shot");
        let p = trained.schedule.depth() as u64;
        let summary = SummaryRow {
            seed,
            optimizer: "acqaoa".into(),
            best_index,
            best_bitstring: bitstring(ctx, best_index),
            best_cost: ctx.landscape.costs[best_index],
            found_optimum: found(ctx, best_index),
            success_probability: Some(out.success_probability),
            oracle_calls: p,
            cqnn_runs: p * ctx.oracle.qnn_runs_per_call() * ctx.encodings.len() as u64,
            qnn_runs: 0,
            measurements: self.readout_shots,
            exhausted: trained.exhausted,
        };
        let schedule = serde_json::to_string_pretty(&json!({
            "seed": seed,
            "schedule": trained.schedule,
            "expected_costs": trained.expected_costs,
            "replay": {
                "oracle": ctx.oracle.method.name(),
                "expected_cost": out.expected_cost,
                "success_probability": out.success_probability,
                "ancilla_zero_probability": out.ancilla_zero_probability,
            },
        }))?;
        Ok(SeedResult {
            records,
            summary,
            artifacts: vec![(format!("schedule_seed{seed}.json"), schedule + "\n")],
        })
    }
}
