//! Adaptive QAOA over the parameter register with a digitized
//! continuous-variable mixer pool.

mod mixer;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use mixer::{
    apply_mixer, build_mixer_matrix, default_pool, dense_exponential, fourier_matrix, position_matrix,
    position_pauli_sum, Mixer, MixerKind, MixerSpec, DENSE_CAP, EIGEN_BITS,
};

use crate::encoders::Direction;
use crate::error::{Error, Result};
use crate::oracles::PhaseOracle;
use crate::param::ParamGridSpec;
use crate::sv::{Register, StateVector};

/// Tolerance for membership in the optimal set.
pub const OPTIMAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaoaLayer {
    pub gamma: f64,
    pub mixer: MixerSpec,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaoaSchedule {
    pub layers: Vec<QaoaLayer>,
    #[serde(default)]
    pub adaptive: bool,
}

impl QaoaSchedule {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn validate(&self, grid: &ParamGridSpec) -> Result<()> {
        for (l, layer) in self.layers.iter().enumerate() {
            if !(layer.gamma.is_finite() && layer.beta.is_finite()) {
                return Err(Error::InvalidConfig(format!("layer {l} has a non-finite angle")));
            }
            layer.mixer.validate(grid)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaOutcome {
    pub expected_cost: f64,
    pub success_probability: f64,
    /// Smallest ancilla-zero population seen after a phase step.
    pub ancilla_zero_probability: f64,
    pub marginal: Vec<f64>,
}

/// Indices within [`OPTIMAL_TOL`] of the best cost.
pub fn optimal_set(costs: &[f64], direction: Direction) -> Vec<usize> {
    let best = costs
        .iter()
        .copied()
        .fold(None, |b: Option<f64>, c| match b {
            Some(b) if !direction.better(c, b) => Some(b),
            _ => Some(c),
        })
        .unwrap_or(0.0);
    (0..costs.len()).filter(|&j| (costs[j] - best).abs() <= OPTIMAL_TOL).collect()
}

/// Phase oracle, mixers and the enumerated cost table of one instance.
pub struct QaoaProblem {
    oracle: Arc<dyn PhaseOracle>,
    grid: ParamGridSpec,
    costs: Vec<f64>,
    direction: Direction,
    optimal: Vec<usize>,
    mixers: Vec<Mixer>,
}

impl QaoaProblem {
    pub fn new(
        oracle: Arc<dyn PhaseOracle>,
        grid: ParamGridSpec,
        costs: Vec<f64>,
        direction: Direction,
        pool: &[MixerSpec],
    ) -> Result<Self> {
        if costs.len() != grid.size() {
            return Err(Error::DimensionMismatch {
                expected: grid.size(),
                got: costs.len(),
            });
        }
        let width = oracle.layout().width(Register::Parameter)?;
        if width != grid.total_bits() {
            return Err(Error::WidthMismatch {
                register: Register::Parameter,
                expected: grid.total_bits(),
                got: width,
            });
        }
        let mixers = pool
            .iter()
            .map(|m| Mixer::new(m.clone(), &grid))
            .collect::<Result<_>>()?;
        Ok(Self {
            optimal: optimal_set(&costs, direction),
            oracle,
            grid,
            costs,
            direction,
            mixers,
        })
    }

    pub fn grid(&self) -> &ParamGridSpec {
        &self.grid
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn optimal(&self) -> &[usize] {
        &self.optimal
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn pool(&self) -> Vec<MixerSpec> {
        self.mixers.iter().map(|m| m.spec().clone()).collect()
    }

    /// Uniform superposition on the parameter register.
    pub fn initial_state(&self) -> Result<StateVector> {
        let mut s = StateVector::zero(self.oracle.layout());
        s.hadamard_register(Register::Parameter)?;
        Ok(s)
    }

    fn mixer(&self, spec: &MixerSpec) -> Result<Mixer> {
        match self.mixers.iter().find(|m| m.spec() == spec) {
            Some(m) => Ok(m.clone()),
            None => Mixer::new(spec.clone(), &self.grid),
        }
    }

    /// Applies one layer and returns the ancilla-zero population after the phase step.
    pub fn apply_layer(&self, state: &mut StateVector, layer: &QaoaLayer) -> Result<f64> {
        let report = self.oracle.apply(state, layer.gamma)?;
        self.mixer(&layer.mixer)?.apply(state, layer.beta)?;
        Ok(report.ancilla_zero_probability)
    }

    pub fn evolve(&self, schedule: &QaoaSchedule) -> Result<(StateVector, f64)> {
        let mut s = self.initial_state()?;
        let mut zero = 1.0f64;
        for layer in &schedule.layers {
            zero = zero.min(self.apply_layer(&mut s, layer)?);
        }
        Ok((s, zero))
    }

    pub fn expected_cost(&self, state: &StateVector) -> Result<f64> {
        let p = state.register_probabilities(Register::Parameter)?;
        Ok(p.iter().zip(&self.costs).map(|(p, c)| p * c).sum())
    }

    pub fn success_probability(&self, state: &StateVector) -> Result<f64> {
        let p = state.register_probabilities(Register::Parameter)?;
        Ok(self.optimal.iter().map(|&j| p[j]).sum())
    }

    /// Cost to minimize: `⟨C⟩` or `−⟨C⟩`.
    fn objective(&self, state: &StateVector) -> Result<f64> {
        let c = self.expected_cost(state)?;
        Ok(match self.direction {
            Direction::Minimize => c,
            Direction::Maximize => -c,
        })
    }
}

/// Runs `schedule` from the uniform state.
pub fn qaoa_run(problem: &QaoaProblem, schedule: &QaoaSchedule) -> Result<(StateVector, QaoaOutcome)> {
    schedule.validate(problem.grid())?;
    let (state, zero) = problem.evolve(schedule)?;
    let outcome = QaoaOutcome {
        expected_cost: problem.expected_cost(&state)?,
        success_probability: problem.success_probability(&state)?,
        ancilla_zero_probability: zero,
        marginal: state.register_probabilities(Register::Parameter)?,
    };
    Ok((state, outcome))
}

/// Finite-difference step for gradients at `β = 0`.
pub const GRADIENT_STEP: f64 = 1e-4;

/// Truncation bound of the central difference for each pool entry,
/// `h²(2‖H‖)³‖C‖/6`, plus a rounding floor.
pub fn gradient_error_bounds(problem: &QaoaProblem) -> Vec<f64> {
    let c = problem.costs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    problem
        .mixers
        .iter()
        .map(|m| GRADIENT_STEP.powi(2) * (2.0 * m.norm()).powi(3) * c / 6.0 + 1e-9)
        .collect()
}

/// `|d⟨C⟩/dβ|` at `β = 0` for each pool entry after the phase step `γ`.
pub fn mixer_gradients(problem: &QaoaProblem, state: &StateVector, gamma: f64) -> Result<Vec<f64>> {
    let mut phased = state.clone();
    problem.oracle.apply(&mut phased, gamma)?;
    problem
        .mixers
        .iter()
        .map(|m| {
            let mut plus = phased.clone();
            m.apply(&mut plus, GRADIENT_STEP)?;
            let mut minus = phased.clone();
            m.apply(&mut minus, -GRADIENT_STEP)?;
            let d = problem.expected_cost(&plus)? - problem.expected_cost(&minus)?;
            Ok((d / (2.0 * GRADIENT_STEP)).abs())
        })
        .collect()
}

/// Pool entry with the steepest first-order effect. Gradients that agree
/// within their difference error bounds tie, and earlier entries win ties.
pub fn adaptive_select_mixer(problem: &QaoaProblem, state: &StateVector, gamma: f64) -> Result<MixerSpec> {
    if problem.mixers.is_empty() {
        return Err(Error::InvalidArgument("mixer pool is empty".into()));
    }
    let grads = mixer_gradients(problem, state, gamma)?;
    let err = gradient_error_bounds(problem);
    let mut best = 0;
    for (i, g) in grads.iter().enumerate() {
        if g - err[i] > grads[best] + err[best] {
            best = i;
        }
    }
    Ok(problem.mixers[best].spec().clone())
}

fn default_gamma0() -> f64 {
    1.0
}
fn default_step() -> f64 {
    0.5
}
fn default_floor() -> f64 {
    1e-3
}
fn default_restarts() -> usize {
    2
}
fn default_budget() -> usize {
    4000
}
fn default_true() -> bool {
    true
}

/// Layer-by-layer training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaoaConfig {
    pub layers: usize,
    #[serde(default)]
    pub seed: u64,
    /// Objective evaluations allowed over the whole run.
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Phase angle used for mixer selection and as the first search start.
    #[serde(default = "default_gamma0")]
    pub gamma0: f64,
    #[serde(default = "default_step")]
    pub initial_step: f64,
    #[serde(default = "default_floor")]
    pub step_floor: f64,
    /// Extra random starts per layer.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Select mixers by gradient; otherwise use the first pool entry.
    #[serde(default = "default_true")]
    pub adaptive: bool,
    /// Restrict `γ` to non-negative multiples of this unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_unit: Option<f64>,
}

impl QaoaConfig {
    pub fn new(layers: usize) -> Self {
        Self {
            layers,
            seed: 0,
            budget: default_budget(),
            gamma0: default_gamma0(),
            initial_step: default_step(),
            step_floor: default_floor(),
            restarts: default_restarts(),
            adaptive: true,
            gamma_unit: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidConfig("optimizer budget must be positive".into()));
        }
        if !(self.initial_step > 0.0 && self.step_floor > 0.0 && self.step_floor <= self.initial_step) {
            return Err(Error::InvalidConfig("need 0 < step_floor <= initial_step".into()));
        }
        if let Some(u) = self.gamma_unit {
            if !(u > 0.0 && u.is_finite()) {
                return Err(Error::InvalidConfig("gamma_unit must be positive".into()));
            }
        }
        Ok(())
    }

    fn snap(&self, gamma: f64) -> f64 {
        match self.gamma_unit {
            Some(u) => (gamma / u).round().max(0.0) * u,
            None => gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedSchedule {
    pub schedule: QaoaSchedule,
    /// `⟨C⟩` after each prefix of the schedule, starting with the uniform state.
    pub expected_costs: Vec<f64>,
    pub evaluations: usize,
    pub exhausted: bool,
}

struct Budget {
    left: usize,
    used: usize,
}

impl Budget {
    fn take(&mut self) -> bool {
        if self.left == 0 {
            return false;
        }
        self.left -= 1;
        self.used += 1;
        true
    }
}

/// Compass search on `(γ, β)` for one layer appended to `base`.
fn compass(
    problem: &QaoaProblem,
    base: &StateVector,
    mixer: &Mixer,
    cfg: &QaoaConfig,
    start: (f64, f64),
    budget: &mut Budget,
) -> Result<Option<((f64, f64), f64)>> {
    let eval = |g: f64, b: f64| -> Result<f64> {
        let mut s = base.clone();
        problem.oracle.apply(&mut s, g)?;
        mixer.apply(&mut s, b)?;
        problem.objective(&s)
    };
    let mut x = (cfg.snap(start.0), start.1);
    if !budget.take() {
        return Ok(None);
    }
    let mut fx = eval(x.0, x.1)?;
    let mut h = cfg.initial_step;
    while h >= cfg.step_floor {
        let mut moved = false;
        for (dg, db) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let y = (cfg.snap(x.0 + dg), x.1 + db);
            if y == x {
                continue;
            }
            if !budget.take() {
                return Ok(Some((x, fx)));
            }
            let fy = eval(y.0, y.1)?;
            if fy < fx - 1e-15 {
                x = y;
                fx = fy;
                moved = true;
                break;
            }
        }
        if !moved {
            h /= 2.0;
        }
    }
    Ok(Some((x, fx)))
}

/// Greedy layer growth: pick a mixer, then search its angles from several starts.
pub fn hyperparam_optimize(problem: &QaoaProblem, cfg: &QaoaConfig) -> Result<TrainedSchedule> {
    cfg.validate()?;
    if problem.mixers.is_empty() {
        return Err(Error::InvalidArgument("mixer pool is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut budget = Budget {
        left: cfg.budget,
        used: 0,
    };
    let mut schedule = QaoaSchedule {
        layers: Vec::new(),
        adaptive: cfg.adaptive,
    };
    let mut state = problem.initial_state()?;
    let mut current = problem.objective(&state)?;
    let mut expected_costs = vec![problem.expected_cost(&state)?];
    let mut exhausted = false;
    for _ in 0..cfg.layers {
        let spec = if cfg.adaptive {
            adaptive_select_mixer(problem, &state, cfg.gamma0)?
        } else {
            problem.mixers[0].spec().clone()
        };
        let mixer = problem.mixer(&spec)?;
        let mut starts = vec![(cfg.gamma0, 0.0)];
        for _ in 0..cfg.restarts {
            let g = match cfg.gamma_unit {
                Some(u) => rng.gen_range(0..=4) as f64 * u,
                None => rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            };
            starts.push((g, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)));
        }
        let mut best = ((0.0, 0.0), current);
        for start in starts {
            match compass(problem, &state, &mixer, cfg, start, &mut budget)? {
                Some((x, fx)) if fx < best.1 => best = (x, fx),
                _ => {}
            }
            if budget.left == 0 {
                exhausted = true;
                break;
            }
        }
        let layer = QaoaLayer {
            gamma: best.0 .0,
            mixer: spec,
            beta: best.0 .1,
        };
        problem.apply_layer(&mut state, &layer)?;
        current = problem.objective(&state)?;
        expected_costs.push(problem.expected_cost(&state)?);
        schedule.layers.push(layer);
        if exhausted {
            break;
        }
    }
    Ok(TrainedSchedule {
        schedule,
        expected_costs,
        evaluations: budget.used,
        exhausted,
    })
}
