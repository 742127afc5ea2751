//! Task definitions, brute-force references, experiment configuration and
//! persisted outputs.
//!
//! An experiment is a versioned JSON document:
//!
//! ```json
//! {
//!   "version": 1,
//!   "task": {
//!     "problem": {"kind": "vqe", "terms": [{"weight": 1.0, "circuit": {"qubits": 1, "gates": [{"kind": "fixed", "gate": "z", "target": 0}]}}]},
//!     "ansatz": {"qubits": 1, "gates": [{"kind": "param", "axis": "y", "target": 0, "param": 0}]},
//!     "grid": {"params": 1, "bits": 3}
//!   },
//!   "oracle": {"amplitude_bits": 8},
//!   "optimizer": {"kind": "gas"},
//!   "seeds": [0, 1, 2]
//! }
//! ```
//!
//! Angles are in radians and complex matrix entries are `[re, im]` pairs.

mod optimizers;
mod task;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use optimizers::{
    optimizer, optimizer_names, threshold_oracle, threshold_oracle_names, Optimizer, RunContext, SeedResult,
    SummaryRow, Trial,
};
pub use task::{
    brute_force_landscape, classifier_phase_accumulate, qubit_count, Landscape, Problem, Sample, TaskSpec,
    VqeEncoding, LANDSCAPE_BITS,
};

use crate::error::{Error, Result};
use crate::gas::{gas_resources, EvalMode, GasResources};
use crate::oracles::{OracleConfig, PhaseMethod};

pub const CONFIG_VERSION: u32 = 1;

pub const RUN_RECORDS: &str = "run_records.jsonl";
pub const SUMMARY: &str = "summary.csv";
pub const RESOURCES: &str = "resources.json";
pub const LANDSCAPE: &str = "landscape.csv";

/// Cost evaluation mode named on the command line or in a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Exact,
    Sampled,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_oracle() -> OracleConfig {
    OracleConfig::new(8, 0.25).expect("default oracle settings are valid")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub task: TaskSpec,
    #[serde(default = "default_oracle")]
    pub oracle: OracleConfig,
    /// `{"kind": <registered optimizer>, ...settings}`.
    pub optimizer: Value,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub mode: ModeName,
    /// Shots per evaluation in sampled mode; `⌈1/ε₂⌉` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub mode: Option<ModeName>,
}

fn invalid(e: Error) -> Error {
    match e {
        Error::InvalidConfig(_) | Error::Io(_) => e,
        Error::Json(e) => Error::InvalidConfig(e.to_string()),
        other => Error::InvalidConfig(other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::InvalidConfig(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must not be empty".into()));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidConfig("shots must be positive".into()));
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seeds = vec![s];
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = Some(d.clone());
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
    }

    pub fn eval_mode(&self) -> EvalMode {
        match self.mode {
            ModeName::Exact => EvalMode::Exact,
            ModeName::Sampled => EvalMode::Sampled { shots: self.shots },
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Resource report of an experiment; depends only on the task shape and
/// the oracle precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub system_qubits: usize,
    pub bits_per_param: usize,
    pub params: usize,
    pub solutions: usize,
    pub qubits: usize,
    pub gas: GasResources,
}

pub fn resource_report(
    n: usize,
    d: usize,
    r: usize,
    eps1: f64,
    eps2: f64,
    solutions: usize,
    amplitude_bits: Option<usize>,
) -> Result<ResourceReport> {
    Ok(ResourceReport {
        system_qubits: n,
        bits_per_param: d,
        params: r,
        solutions,
        qubits: qubit_count(n, d, r, eps2, amplitude_bits)?,
        gas: gas_resources((-(d as f64)).exp2(), eps1, eps2, r, solutions as f64)?,
    })
}

fn experiment_resources(cfg: &ExperimentConfig, s: usize) -> Result<ResourceReport> {
    let amp = (cfg.oracle.method != PhaseMethod::Lcu).then(|| cfg.oracle.amplitude_bits());
    resource_report(
        cfg.task.system_qubits(),
        cfg.task.grid.bits(),
        cfg.task.grid.params(),
        cfg.oracle.eps1(),
        cfg.oracle.eps2(),
        s,
        amp,
    )
}

/// A validated experiment ready to run.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub context: Arc<RunContext>,
    trial: Box<dyn Trial>,
    resources: ResourceReport,
}

impl Experiment {
    /// Builds the encodings and oracles and checks every setting without writing
    /// anything. All failures are reported as configuration errors.
    pub fn build(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let opt = optimizer(&config.optimizer)?;
        let encodings = config.task.encodings().map_err(invalid)?;
        let landscape = brute_force_landscape(&config.task).map_err(invalid)?;
        let resources = experiment_resources(&config, landscape.solutions()).map_err(invalid)?;
        let context = Arc::new(RunContext {
            task: config.task.clone(),
            encodings,
            landscape,
            oracle: config.oracle.clone(),
            mode: config.eval_mode(),
        });
        let trial = opt.prepare(context.clone()).map_err(invalid)?;
        Ok(Self {
            config,
            context,
            trial,
            resources,
        })
    }

    pub fn resources(&self) -> &ResourceReport {
        &self.resources
    }

    /// Runs every seed, in parallel, and returns results in seed order.
    pub fn run_seeds(&self) -> Result<Vec<SeedResult>> {
        let trial = self.trial.as_ref();
        std::thread::scope(|scope| {
            let handles: Vec<_> = self
                .config
                .seeds
                .iter()
                .map(|&seed| scope.spawn(move || trial.run(seed)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("seed run panicked"))
                .collect()
        })
    }
}

/// What a finished experiment wrote.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summaries: Vec<SummaryRow>,
    /// Some seed stopped on its budget before its target.
    pub exhausted: bool,
}

/// Loads, validates and runs the experiment at `path`, then writes
/// `run_records.jsonl`, `summary.csv`, `resources.json` and any optimizer
/// artifacts to the output directory. Nothing is written when the config is
/// invalid.
pub fn run_experiment(path: &Path, overrides: &Overrides) -> Result<ExperimentOutcome> {
    let mut config = ExperimentConfig::load(path)?;
    config.apply(overrides);
    run_config(config)
}

pub fn run_config(config: ExperimentConfig) -> Result<ExperimentOutcome> {
    let exp = Experiment::build(config)?;
    let results = exp.run_seeds()?;
    let out_dir = exp.config.out_dir();
    fs::create_dir_all(&out_dir)?;
    let mut files = Vec::new();

    let mut jsonl = String::new();
    for r in &results {
        for rec in &r.records {
            jsonl.push_str(&serde_json::to_string(rec)?);
            jsonl.push('\n');
        }
    }
    files.push(write(&out_dir, RUN_RECORDS, &jsonl)?);

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &results {
        w.serialize(&r.summary)?;
    }
    let csv_bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    files.push(write(&out_dir, SUMMARY, &String::from_utf8_lossy(&csv_bytes))?);

    files.push(write(&out_dir, RESOURCES, &(serde_json::to_string_pretty(exp.resources())? + "\n"))?);
    for r in &results {
        for (name, body) in &r.artifacts {
            files.push(write(&out_dir, name, body)?);
        }
    }
    Ok(ExperimentOutcome {
        out_dir,
        files,
        exhausted: results.iter().any(|r| r.summary.exhausted),
        summaries: results.into_iter().map(|r| r.summary).collect(),
    })
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    let p = dir.join(name);
    fs::write(&p, body)?;
    Ok(p)
}

#[derive(Debug, Serialize)]
struct LandscapeRow {
    index: usize,
    bitstring: String,
    angles: String,
    cost: f64,
    optimal: bool,
}

/// Landscape table as CSV: index, bitstring, space-separated angles, cost, optimal flag.
pub fn landscape_csv(task: &TaskSpec, landscape: &Landscape) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let bits = task.grid.total_bits();
    for (j, &cost) in landscape.costs.iter().enumerate() {
        let angles: Vec<String> = task.grid.angles(j).iter().map(|a| format!("{a}")).collect();
        w.serialize(LandscapeRow {
            index: j,
            bitstring: crate::param::Bitstring::from_value(j, bits).to_string(),
            angles: angles.join(" "),
            cost,
            optimal: landscape.optimal.contains(&j),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Writes the brute-force landscape of the config at `path` to `landscape.csv`.
pub fn write_landscape(path: &Path, overrides: &Overrides) -> Result<PathBuf> {
    let mut config = ExperimentConfig::load(path)?;
    config.apply(overrides);
    let landscape = brute_force_landscape(&config.task).map_err(invalid)?;
    let out = config.out_dir();
    fs::create_dir_all(&out)?;
    write(&out, LANDSCAPE, &landscape_csv(&config.task, &landscape)?)
}

/// Input of the `resources` subcommand.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceParams {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub eps1: f64,
    pub eps2: f64,
    #[serde(default = "one")]
    pub solutions: usize,
    #[serde(default)]
    pub amplitude_bits: Option<usize>,
}

fn one() -> usize {
    1
}

impl ResourceParams {
    pub fn report(&self) -> Result<ResourceReport> {
        if self.solutions == 0 {
            return Err(Error::InvalidConfig("solutions must be at least 1".into()));
        }
        resource_report(self.n, self.d, self.r, self.eps1, self.eps2, self.solutions, self.amplitude_bits)
            .map_err(invalid)
    }
}
