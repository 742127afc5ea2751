mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qtrain::acqaoa::*;
use qtrain::encoders::{AmplitudeEncoding, Direction, HadamardEncoding};
use qtrain::oracles::{operator_distance, parameter_block, IdealPhaseOracle, PhaseOracle};
use qtrain::param::ParamGridSpec;
use qtrain::sv::{FixedGate, QubitLayout, Register, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn toy_costs() -> Vec<f64> {
    (0..8).map(|j| (j as f64 * PI / 8.0).cos()).collect()
}

fn problem(costs: Vec<f64>, g: ParamGridSpec, direction: Direction, pool: &[MixerSpec]) -> QaoaProblem {
    let oracle: Arc<dyn PhaseOracle> = Arc::new(IdealPhaseOracle::new(costs.clone()).unwrap());
    QaoaProblem::new(oracle, g, costs, direction, pool).unwrap()
}

fn toy_problem() -> QaoaProblem {
    let g = grid(1, 3);
    let pool = default_pool(&g);
    problem(toy_costs(), g, Direction::Minimize, &pool)
}

fn param_layout(bits: usize) -> Arc<QubitLayout> {
    Arc::new(QubitLayout::single(Register::Parameter, bits))
}

/// Full matrix of `e^{−iβH}` via the state-vector path.
fn applied_matrix(spec: &MixerSpec, g: &ParamGridSpec, beta: f64) -> DMatrix<Complex64> {
    let mixer = Mixer::new(spec.clone(), g).unwrap();
    parameter_block(&param_layout(g.total_bits()), |s| mixer.apply(s, beta)).unwrap()
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn position_is_diagonal_ramp() {
    let j = build_mixer_matrix(MixerKind::J, 2).unwrap();
    let want = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(4, |i, _| c(i as f64, 0.0)));
    assert_eq!(j, want);
}

#[test]
fn momentum_one_qubit() {
    let s = build_mixer_matrix(MixerKind::S, 1).unwrap();
    let want = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(-0.5, 0.0), c(-0.5, 0.0), c(0.5, 0.0)]);
    assert!(max_abs(&(s - want)) < 1e-12);
}

#[test]
fn pauli_sum_position() {
    for n in 1..=4 {
        assert!(max_abs(&(position_pauli_sum(n) - position_matrix(n))) < 1e-12);
    }
}

#[test]
fn generators_hermitian() {
    for kind in MixerKind::ALL {
        let m = build_mixer_matrix(kind, 2).unwrap();
        assert!(max_abs(&(&m - m.adjoint())) < 1e-10, "{kind}");
    }
    assert!(build_mixer_matrix(MixerKind::TT, 7).is_err());
    assert!(build_mixer_matrix(MixerKind::T, 13).is_err());
}

#[test]
fn exponentials_match_dense_path() {
    let beta = 0.37;
    for bits in 1..=4 {
        let g = grid(1, bits);
        for kind in MixerKind::ALL.iter().filter(|k| !k.is_pair()) {
            let spec = MixerSpec::single(*kind, 0);
            let u = applied_matrix(&spec, &g, beta);
            let want = dense_exponential(&build_mixer_matrix(*kind, bits).unwrap(), beta);
            assert!(operator_distance(&u, &want) < 1e-10, "{kind} bits {bits}");
            let id = DMatrix::identity(u.nrows(), u.ncols());
            assert!(max_abs(&(u.adjoint() * &u - id)) < 1e-10);
        }
    }
    for bits in 1..=2 {
        let g = grid(2, bits);
        for kind in MixerKind::ALL.iter().filter(|k| k.is_pair()) {
            let u = applied_matrix(&MixerSpec::pair(*kind, 0, 1), &g, beta);
            let want = dense_exponential(&build_mixer_matrix(*kind, bits).unwrap(), beta);
            assert!(operator_distance(&u, &want) < 1e-10, "{kind} bits {bits}");
        }
    }
}

#[test]
fn pair_order_follows_indices() {
    let g = grid(2, 2);
    let fwd = applied_matrix(&MixerSpec::pair(MixerKind::ST, 0, 1), &g, 0.3);
    let rev = applied_matrix(&MixerSpec::pair(MixerKind::ST, 1, 0), &g, 0.3);
    assert!(operator_distance(&fwd, &rev) > 1e-3);
}

#[test]
fn full_momentum_turn_shifts_by_one() {
    for bits in 1..=3 {
        let n = 1usize << bits;
        let g = grid(1, bits);
        let u = applied_matrix(&MixerSpec::single(MixerKind::S, 0), &g, 2.0 * PI / n as f64);
        for j in 0..n {
            let target = (j + 1) % n;
            assert!((u[(target, j)] - c(1.0, 0.0)).norm() < 1e-10, "bits {bits} j {j}");
        }
    }
}

#[test]
fn position_phases() {
    let g = grid(1, 2);
    let u = applied_matrix(&MixerSpec::single(MixerKind::J, 0), &g, PI / 2.0);
    for j in 0..4 {
        assert!((u[(j, j)] - Complex64::from_polar(1.0, -PI / 2.0 * j as f64)).norm() < 1e-12);
    }
}

#[test]
fn zero_angle_is_identity() {
    let g = grid(2, 2);
    for spec in default_pool(&g) {
        let u = applied_matrix(&spec, &g, 0.0);
        assert!(max_abs(&(u - DMatrix::identity(16, 16))) < 1e-12, "{spec}");
    }
}

#[test]
fn mixer_targets_checked() {
    let g = grid(2, 2);
    assert!(MixerSpec::single(MixerKind::J, 2).validate(&g).is_err());
    assert!(MixerSpec::pair(MixerKind::JJ, 1, 1).validate(&g).is_err());
    assert!(MixerSpec::single(MixerKind::JJ, 0).validate(&g).is_err());
    assert!(MixerSpec::single(MixerKind::T, 0).validate(&grid(1, 7)).is_err());
    assert!(MixerSpec::single(MixerKind::S, 0).validate(&grid(1, 7)).is_ok());
}

#[test]
fn mixer_acts_on_named_parameter_only() {
    let g = grid(2, 2);
    let u = applied_matrix(&MixerSpec::single(MixerKind::S, 1), &g, 0.8);
    let local = dense_exponential(&build_mixer_matrix(MixerKind::S, 2).unwrap(), 0.8);
    let want = DMatrix::<Complex64>::identity(4, 4).kronecker(&local);
    assert!(operator_distance(&u, &want) < 1e-10);
}

#[test]
fn depth_zero_is_uniform() {
    let p = toy_problem();
    let (_, out) = qaoa_run(&p, &QaoaSchedule::default()).unwrap();
    assert!((out.success_probability - 1.0 / 8.0).abs() < 1e-15);
    let mean = toy_costs().iter().sum::<f64>() / 8.0;
    assert!((out.expected_cost - mean).abs() < 1e-12);
    let trained = hyperparam_optimize(&p, &QaoaConfig::new(0)).unwrap();
    assert!(trained.schedule.layers.is_empty());
    assert!((trained.expected_costs[0] - mean).abs() < 1e-12);
}

#[test]
fn zero_angles_leave_uniform() {
    let p = toy_problem();
    let schedule = QaoaSchedule {
        layers: vec![
            QaoaLayer { gamma: 0.0, mixer: MixerSpec::single(MixerKind::S, 0), beta: 0.0 };
            3
        ],
        adaptive: false,
    };
    let (s, _) = qaoa_run(&p, &schedule).unwrap();
    assert_eq!(s, p.initial_state().unwrap());
}

#[test]
fn trained_depth_two_amplifies() {
    let p = toy_problem();
    assert_eq!(p.optimal(), &[7]);
    let trained = hyperparam_optimize(&p, &QaoaConfig::new(2)).unwrap();
    let (_, out) = qaoa_run(&p, &trained.schedule).unwrap();
    assert!(out.success_probability >= 0.25, "{}", out.success_probability);
    assert!((out.expected_cost - trained.expected_costs[2]).abs() < 1e-10);
}

#[test]
fn objective_never_worsens_with_depth() {
    let p = toy_problem();
    let mut prev = f64::INFINITY;
    for layers in 0..=3 {
        let t = hyperparam_optimize(&p, &QaoaConfig::new(layers)).unwrap();
        let last = *t.expected_costs.last().unwrap();
        assert!(last <= prev + 1e-12, "p={layers}");
        assert!(t.expected_costs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        prev = last;
    }
}

#[test]
fn training_is_deterministic() {
    let p = toy_problem();
    let cfg = QaoaConfig {
        seed: 9,
        ..QaoaConfig::new(2)
    };
    let a = serde_json::to_string(&hyperparam_optimize(&p, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&hyperparam_optimize(&p, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tiny_budget_is_flagged() {
    let p = toy_problem();
    let cfg = QaoaConfig {
        budget: 5,
        ..QaoaConfig::new(2)
    };
    let t = hyperparam_optimize(&p, &cfg).unwrap();
    assert!(t.exhausted);
    assert!(t.evaluations <= 5);
}

#[test]
fn lattice_gamma_respected() {
    let p = toy_problem();
    let cfg = QaoaConfig {
        gamma_unit: Some(0.5),
        ..QaoaConfig::new(2)
    };
    let t = hyperparam_optimize(&p, &cfg).unwrap();
    for l in &t.schedule.layers {
        let k = l.gamma / 0.5;
        assert!((k - k.round()).abs() < 1e-12 && k >= 0.0);
    }
}

#[test]
fn maximization_amplifies_best() {
    let g = grid(1, 3);
    let pool = default_pool(&g);
    let p = problem(toy_costs(), g, Direction::Maximize, &pool);
    assert_eq!(p.optimal(), &[0]);
    let t = hyperparam_optimize(&p, &QaoaConfig::new(2)).unwrap();
    let (_, out) = qaoa_run(&p, &t.schedule).unwrap();
    assert!(out.success_probability > 1.0 / 8.0);
}

#[test]
fn singleton_pool_selected() {
    let g = grid(1, 3);
    let pool = [MixerSpec::single(MixerKind::T, 0)];
    let p = problem(toy_costs(), g, Direction::Minimize, &pool);
    let s = p.initial_state().unwrap();
    assert_eq!(adaptive_select_mixer(&p, &s, 1.0).unwrap(), pool[0]);
}

#[test]
fn stationary_state_picks_first() {
    let p = toy_problem();
    let s = StateVector::basis(p.initial_state().unwrap().layout_arc().clone(), 7).unwrap();
    let grads = mixer_gradients(&p, &s, 1.0).unwrap();
    let bounds = gradient_error_bounds(&p);
    assert!(grads.iter().zip(&bounds).all(|(g, b)| g <= b), "{grads:?}");
    assert_eq!(adaptive_select_mixer(&p, &s, 1.0).unwrap(), p.pool()[0]);
}

#[test]
fn selection_matches_small_angle_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let enc = HadamardEncoding::new(grid(1, 3), random_ansatz(&mut rng, 1, 1), pauli(1, FixedGate::Z, 0)).unwrap();
    let g = enc.grid().clone();
    let costs: Vec<f64> = (0..8).map(|j| enc.reference_value(&g.angles(j)).unwrap()).collect();
    let pool = default_pool(&g);
    let p = problem(costs, g.clone(), Direction::Minimize, &pool);
    let s = p.initial_state().unwrap();
    let chosen = adaptive_select_mixer(&p, &s, 1.0).unwrap();
    let mut phased = s.clone();
    IdealPhaseOracle::new(p.costs().to_vec()).unwrap().apply(&mut phased, 1.0).unwrap();
    let sweep: Vec<f64> = pool
        .iter()
        .map(|m| {
            let at = |b: f64| {
                let mut x = phased.clone();
                apply_mixer(&mut x, &g, m, b).unwrap();
                p.expected_cost(&x).unwrap()
            };
            ((at(0.01) - at(-0.01)) / 0.02).abs()
        })
        .collect();
    let top = sweep.iter().copied().fold(0.0, f64::max);
    let idx = pool.iter().position(|m| *m == chosen).unwrap();
    assert!(sweep[idx] >= top - 1e-4, "{chosen} {sweep:?}");
}

#[test]
fn schedule_json_round_trip() {
    let schedule = QaoaSchedule {
        layers: vec![
            QaoaLayer { gamma: 0.5, mixer: MixerSpec::single(MixerKind::J2S2, 0), beta: -0.25 },
            QaoaLayer { gamma: 1.5, mixer: MixerSpec::pair(MixerKind::ST, 1, 0), beta: 0.125 },
        ],
        adaptive: true,
    };
    let text = serde_json::to_string(&schedule).unwrap();
    assert!(text.contains("\"J2+S2\"") && text.contains("\"SxT\""));
    let back: QaoaSchedule = serde_json::from_str(&text).unwrap();
    assert_eq!(back, schedule);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn alternation_preserves_norm(seed in any::<u64>(), gammas in prop::collection::vec(-3.0..3.0f64, 1..4)) {
        let p = {
            let g = grid(2, 2);
            let pool = default_pool(&g);
            let costs: Vec<f64> = (0..16).map(|j| ((j * 7 % 16) as f64 / 8.0) - 1.0).collect();
            problem(costs, g, Direction::Minimize, &pool)
        };
        let pool = p.pool();
        let layers = gammas
            .iter()
            .enumerate()
            .map(|(i, &gamma)| QaoaLayer {
                gamma,
                mixer: pool[(seed as usize + i) % pool.len()].clone(),
                beta: gamma * 0.7,
            })
            .collect();
        let (s, out) = qaoa_run(&p, &QaoaSchedule { layers, adaptive: false }).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        prop_assert!((out.marginal.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}
