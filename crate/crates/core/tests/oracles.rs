mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qtrain::encoders::*;
use qtrain::oracles::*;
use qtrain::param::{Circuit, ParamGridSpec};
use qtrain::sv::{Axis, FixedGate, Register, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_vqe() -> Arc<dyn AmplitudeEncoding> {
    Arc::new(HadamardEncoding::new(grid(1, 3), ry_ansatz(), pauli(1, FixedGate::Z, 0)).unwrap())
}

fn costs(enc: &dyn AmplitudeEncoding) -> Vec<f64> {
    let g = enc.grid();
    (0..g.size())
        .map(|j| enc.cost_map().cost(enc.reference_value(&g.angles(j)).unwrap()))
        .collect()
}

fn uniform(layout: Arc<qtrain::sv::QubitLayout>) -> StateVector {
    let mut s = StateVector::zero(layout);
    s.hadamard_register(Register::Parameter).unwrap();
    s
}

/// `Σ_j e^{-iγC_j}|j⟩/√N` on the parameter register of `layout`.
fn exact_phase_state(layout: Arc<qtrain::sv::QubitLayout>, costs: &[f64], gamma: f64) -> StateVector {
    let mut s = uniform(layout);
    s.apply_register_diagonal(Register::Parameter, |j| Complex64::from_polar(1.0, -gamma * costs[j]))
        .unwrap();
    s
}

#[test]
fn fidelity_zero_peaks_at_quarter_turns() {
    let enc = SwapEncoding::new(ParamGridSpec::new(0, 1).unwrap(), Circuit::new(1), pauli(1, FixedGate::X, 0))
        .unwrap();
    let layout = encoding_layout(&enc, 4, &[]).unwrap();
    let mut s = StateVector::zero(layout);
    enc.prepare(&mut s, false, &[]).unwrap();
    amplitude_estimation(&mut s, &enc).unwrap();
    let p = s.register_probabilities(Register::Amplitude).unwrap();
    assert!((p[4] - 0.5).abs() < 1e-10 && (p[12] - 0.5).abs() < 1e-10);
}

#[test]
fn exact_phases_give_deterministic_register() {
    let enc = toy_vqe();
    let layout = encoding_layout(enc.as_ref(), 8, &[]).unwrap();
    for j in 0..8 {
        let idx = layout.index_of(Register::Parameter, j).unwrap();
        let mut s = StateVector::basis(layout.clone(), idx).unwrap();
        enc.prepare(&mut s, false, &[]).unwrap();
        amplitude_estimation(&mut s, enc.as_ref()).unwrap();
        let p = s.register_probabilities(Register::Amplitude).unwrap();
        let raw = 128 - 16 * j;
        let mass = p[raw] + if raw % 128 != 0 { p[256 - raw] } else { 0.0 };
        assert!((mass - 1.0).abs() < 1e-10, "j={j} mass={mass}");
        let theta = enc_theta(enc.as_ref(), j);
        assert!((fold_phase(raw, 8) - theta).abs() < 1e-12);
    }
}

fn enc_theta(enc: &dyn AmplitudeEncoding, j: usize) -> f64 {
    theta_of(enc.reference_value(&enc.grid().angles(j)).unwrap())
}

#[test]
fn estimates_within_precision_with_high_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cfg = OracleConfig::new(7, 0.25).unwrap();
    let eps2 = cfg.eps2();
    for _ in 0..10 {
        let ansatz = random_ansatz(&mut rng, 1, 1);
        let enc = HadamardEncoding::new(grid(1, 2), ansatz, pauli(1, FixedGate::Z, 0)).unwrap();
        let layout = encoding_layout(&enc, cfg.amplitude_bits(), &[]).unwrap();
        for j in 0..4 {
            let theta = enc_theta(&enc, j);
            let idx = layout.index_of(Register::Parameter, j).unwrap();
            let mut s = StateVector::basis(layout.clone(), idx).unwrap();
            enc.prepare(&mut s, false, &[]).unwrap();
            amplitude_estimation(&mut s, &enc).unwrap();
            let p = s.register_probabilities(Register::Amplitude).unwrap();
            let good: f64 = p
                .iter()
                .enumerate()
                .filter(|(raw, _)| (fold_phase(*raw, cfg.amplitude_bits()) - theta).abs() <= eps2 * PI)
                .map(|(_, p)| p)
                .sum();
            assert!(good >= 1.0 - cfg.eps1(), "good={good}");
        }
    }
}

#[test]
fn threshold_boundary_and_below() {
    let rule = ThresholdRule::FlipBelow(0.7);
    assert!(!rule.flips(0.7));
    assert!(rule.flips(0.69));
    assert!(!rule.flips(0.71));
    let above = ThresholdRule::FlipAbove(0.7);
    assert!(!above.flips(0.7) && above.flips(0.8));
}

#[test]
fn swap_threshold_out_of_branch_rejected() {
    let enc = SwapEncoding::new(grid(1, 1), ry_ansatz(), Circuit::new(1)).unwrap();
    assert!(matches!(
        ThresholdRule::for_cost(&enc, Direction::Maximize, -0.5),
        Err(qtrain::Error::ThresholdOutOfRange(_))
    ));
    assert_eq!(
        ThresholdRule::for_cost(&enc, Direction::Maximize, 2.0).unwrap(),
        ThresholdRule::FlipNone
    );
}

/// Sign of each configuration after the oracle on a uniform input.
fn sign_pattern(oracle: &GroverOracle, threshold: f64, bits: usize) -> (Vec<f64>, f64) {
    let layout = ThresholdOracle::layout(oracle);
    let s0 = uniform(layout.clone());
    let mut s = s0.clone();
    oracle.apply(&mut s, threshold).unwrap();
    let n = 1 << bits;
    let signs = (0..n)
        .map(|j| {
            let i = layout.index_of(Register::Parameter, j).unwrap();
            (s.amplitudes()[i] / s0.amplitudes()[i]).re
        })
        .collect();
    (signs, oracle.ancilla_zero_probability(&s))
}

#[test]
fn three_configuration_landscape_flips_exactly_better_ones() {
    // costs cos(jπ/4) for j ∈ {0, 1, 2}; configuration 3 reads cos(3π/4)
    let enc: Arc<dyn AmplitudeEncoding> =
        Arc::new(HadamardEncoding::new(grid(1, 2), ry_ansatz(), pauli(1, FixedGate::Z, 0)).unwrap());
    let c = costs(enc.as_ref());
    let oracle = GroverOracle::new(enc, Direction::Minimize, 6).unwrap();
    for threshold in [0.9, 0.5, 0.0, -0.5] {
        let (signs, zero) = sign_pattern(&oracle, threshold, 2);
        for j in 0..3 {
            let want = if c[j] < threshold { -1.0 } else { 1.0 };
            assert!((signs[j] - want).abs() < 1e-9, "threshold {threshold} j {j}");
        }
        assert!(zero > 1.0 - 1e-9);
    }
}

#[test]
fn grover_oracle_extremes_and_zero_threshold() {
    let enc = toy_vqe();
    let c = costs(enc.as_ref());
    let oracle = GroverOracle::new(enc, Direction::Minimize, 8).unwrap();
    let (signs, _) = sign_pattern(&oracle, -2.0, 3);
    assert!(signs.iter().all(|s| (s - 1.0).abs() < 1e-12));
    let (signs, _) = sign_pattern(&oracle, 2.0, 3);
    assert!(signs.iter().all(|s| (s + 1.0).abs() < 1e-12));
    let (signs, zero) = sign_pattern(&oracle, 0.0, 3);
    for j in 0..8 {
        let want = if c[j] < 0.0 { -1.0 } else { 1.0 };
        assert!((signs[j] - want).abs() < 1e-2);
    }
    assert!(zero > 0.99);
}

#[test]
fn maximization_flips_comparator() {
    let target = Circuit::new(1).rotation(Axis::Y, PI / 2.0, 0);
    let enc: Arc<dyn AmplitudeEncoding> =
        Arc::new(SwapEncoding::new(grid(1, 2), ry_ansatz(), target).unwrap());
    let c = costs(enc.as_ref());
    let oracle = GroverOracle::new(enc, Direction::Maximize, 7).unwrap();
    let (signs, _) = sign_pattern(&oracle, 0.7, 2);
    for j in 0..4 {
        let want = if c[j] > 0.7 { -1.0 } else { 1.0 };
        assert!((signs[j] - want).abs() < 0.1, "j={j} c={} s={}", c[j], signs[j]);
    }
}

#[test]
fn ae_phase_gamma_zero_is_identity() {
    let enc = toy_vqe();
    let oracle = AePhaseOracle::new(vec![enc], 6).unwrap();
    let s0 = uniform(oracle.layout());
    let mut s = s0.clone();
    oracle.apply(&mut s, 0.0).unwrap();
    assert_eq!(s, s0);
}

#[test]
fn ae_phase_single_configuration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let enc: Arc<dyn AmplitudeEncoding> = Arc::new(
        HadamardEncoding::new(grid(1, 2), random_ansatz(&mut rng, 1, 1), pauli(1, FixedGate::Z, 0)).unwrap(),
    );
    let c = costs(enc.as_ref());
    let oracle = AePhaseOracle::new(vec![enc], 10).unwrap();
    let layout = oracle.layout();
    for j in 0..4 {
        let idx = layout.index_of(Register::Parameter, j).unwrap();
        let mut s = StateVector::basis(layout.clone(), idx).unwrap();
        oracle.apply(&mut s, 1.0).unwrap();
        let o = s.amplitudes()[idx] * Complex64::from_polar(1.0, c[j]);
        assert!(o.norm() >= 0.999, "j={j} |o|={}", o.norm());
    }
}

fn lcu_grid_encoding() -> Arc<dyn AmplitudeEncoding> {
    let ansatz = Circuit::new(2)
        .param(Axis::Y, 0, 0)
        .controlled_fixed(FixedGate::X, 0, 1)
        .param(Axis::Y, 1, 1);
    let terms = vec![term(0.5, pauli(2, FixedGate::Z, 0)), term(0.5, pauli(2, FixedGate::Z, 1))];
    Arc::new(LcuEncoding::new(grid(2, 2), ansatz, terms).unwrap())
}

#[test]
fn ae_phase_fidelity_improves_with_t() {
    let enc = lcu_grid_encoding();
    let c = costs(enc.as_ref());
    let mut prev = 0.0;
    for t in [6, 8, 10] {
        let oracle = AePhaseOracle::new(vec![enc.clone()], t).unwrap();
        let mut s = uniform(oracle.layout());
        oracle.apply(&mut s, 1.0).unwrap();
        let f = s.fidelity(&exact_phase_state(oracle.layout(), &c, 1.0)).unwrap();
        assert!(f + 1e-12 >= prev, "t={t} f={f} prev={prev}");
        if t >= 8 {
            assert!(f >= 0.99, "t={t} f={f}");
        }
        prev = f;
    }
}

#[test]
fn ae_phase_is_additive_on_exact_instances() {
    let enc = toy_vqe();
    let oracle = AePhaseOracle::new(vec![enc], 7).unwrap();
    let mut a = uniform(oracle.layout());
    oracle.apply(&mut a, 0.4).unwrap();
    oracle.apply(&mut a, 0.9).unwrap();
    let mut b = uniform(oracle.layout());
    oracle.apply(&mut b, 1.3).unwrap();
    assert!((a.fidelity(&b).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn decoupling_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let cfg = OracleConfig::new(7, 0.05).unwrap();
    for _ in 0..5 {
        let enc: Arc<dyn AmplitudeEncoding> = Arc::new(
            HadamardEncoding::new(grid(1, 2), random_ansatz(&mut rng, 1, 1), pauli(1, FixedGate::Z, 0)).unwrap(),
        );
        let oracle = AePhaseOracle::new(vec![enc.clone()], cfg.amplitude_bits()).unwrap();
        let mut s = uniform(oracle.layout());
        let report = oracle.apply(&mut s, rng.gen_range(0.2..2.0)).unwrap();
        assert!(report.ancilla_zero_probability >= 1.0 - 10.0 * cfg.eps1());
        let g = GroverOracle::new(enc.clone(), Direction::Minimize, cfg.amplitude_bits()).unwrap();
        let mut s = uniform(ThresholdOracle::layout(&g));
        g.apply(&mut s, rng.gen_range(-0.9..0.9)).unwrap();
        assert!(g.ancilla_zero_probability(&s) >= 1.0 - 10.0 * cfg.eps1());
    }
}

fn lcu_block_error(enc: Arc<dyn AmplitudeEncoding>, order: usize) -> (f64, f64) {
    let oracle = LcuPhaseOracle::new(vec![enc.clone()], LcuSeriesSpec::new(order).unwrap()).unwrap();
    let layout = oracle.layout();
    let block = parameter_block(&layout, |s| oracle.apply_series(s)).unwrap();
    let n = block.nrows();
    let g = enc.grid();
    let exact = DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            let e = enc.reference_value(&g.angles(j)).unwrap();
            Complex64::from_polar(1.0, -(e - 1.0) / 2.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut s = uniform(layout);
    let report = oracle.apply(&mut s, oracle.unit_gamma()).unwrap();
    (operator_distance(&block, &exact), report.ancilla_zero_probability)
}

#[test]
fn lcu_block_close_at_high_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let enc: Arc<dyn AmplitudeEncoding> = Arc::new(
        HadamardEncoding::new(grid(1, 1), random_ansatz(&mut rng, 1, 1), pauli(1, FixedGate::Z, 0)).unwrap(),
    );
    let (err, success) = lcu_block_error(enc, 12);
    assert!(err < 1e-3, "err={err}");
    assert!(success > 0.999);
}

#[test]
fn lcu_constant_landscape_is_identity() {
    // ⟨Z⟩ = 1 everywhere: Rz rotations leave |0⟩ alone
    let ansatz = Circuit::new(1).param(Axis::Z, 0, 0);
    let enc: Arc<dyn AmplitudeEncoding> =
        Arc::new(HadamardEncoding::new(grid(1, 1), ansatz, pauli(1, FixedGate::Z, 0)).unwrap());
    let (err, _) = lcu_block_error(enc, 4);
    assert!(err < 1e-6, "err={err}");
}

#[test]
fn lcu_error_monotone_in_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let enc: Arc<dyn AmplitudeEncoding> = Arc::new(
        HadamardEncoding::new(grid(1, 2), random_ansatz(&mut rng, 1, 1), pauli(1, FixedGate::Z, 0)).unwrap(),
    );
    let mut prev = f64::INFINITY;
    for m in [2, 4, 8, 12] {
        let (err, _) = lcu_block_error(enc.clone(), m);
        assert!(err <= prev, "M={m} err={err} prev={prev}");
        prev = err;
    }
}

#[test]
fn lcu_rejects_off_grid_gamma() {
    let oracle = LcuPhaseOracle::new(vec![toy_vqe()], LcuSeriesSpec::new(2).unwrap()).unwrap();
    let mut s = uniform(oracle.layout());
    assert!(matches!(oracle.apply(&mut s, 0.3), Err(qtrain::Error::Unsupported(_))));
    assert!(oracle.apply(&mut s, 1.0).is_ok());
}

#[test]
fn registry_builds_each_phase_oracle() {
    let enc = toy_vqe();
    let c = costs(enc.as_ref());
    let cfg = OracleConfig::new(6, 0.25).unwrap();
    let inputs = PhaseOracleInputs {
        encodings: &[enc],
        costs: &c,
        config: &cfg,
    };
    for name in phase_oracle_names() {
        assert_eq!(phase_oracle(name, &inputs).unwrap().name(), name);
    }
    assert!(phase_oracle("nope", &inputs).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn phase_only_action(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let enc: Arc<dyn AmplitudeEncoding> = Arc::new(
            HadamardEncoding::new(grid(1, 2), random_ansatz(&mut rng, 1, 1), pauli(1, FixedGate::Z, 0)).unwrap(),
        );
        let oracle = AePhaseOracle::new(vec![enc], 8).unwrap();
        let layout = oracle.layout();
        let s0 = uniform(layout.clone());
        let mut s = s0.clone();
        oracle.apply(&mut s, rng.gen_range(-2.0..2.0)).unwrap();
        for j in 0..4 {
            let i = layout.index_of(Register::Parameter, j).unwrap();
            // leakage bound 2^{2−t} per configuration
            prop_assert!((s.amplitudes()[i].norm() - s0.amplitudes()[i].norm()).abs() < 0.25f64.powi(0) * (4.0 / 256.0));
        }
    }
}
