//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any of them fails.

mod common;

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use qtrain::acqaoa::*;
use qtrain::encoders::*;
use qtrain::gas::*;
use qtrain::harness::{qubit_count, run_config, ExperimentConfig, RUN_RECORDS};
use qtrain::oracles::*;
use qtrain::param::{Circuit, ParamGridSpec};
use qtrain::sv::{operator_matrix, Axis, FixedGate, QubitLayout, Register, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn costs(enc: &dyn AmplitudeEncoding) -> Vec<f64> {
    let g = enc.grid();
    (0..g.size())
        .map(|j| enc.cost_map().cost(enc.reference_value(&g.angles(j)).unwrap()))
        .collect()
}

fn uniform(layout: Arc<QubitLayout>) -> StateVector {
    let mut s = StateVector::zero(layout);
    s.hadamard_register(Register::Parameter).unwrap();
    s
}

fn toy_vqe() -> Arc<dyn AmplitudeEncoding> {
    Arc::new(HadamardEncoding::new(grid(1, 3), ry_ansatz(), pauli(1, FixedGate::Z, 0)).unwrap())
}

fn random_encoding(rng: &mut ChaCha8Rng, qubits: usize, g: ParamGridSpec, kind: usize) -> Box<dyn AmplitudeEncoding> {
    let ansatz = random_ansatz(rng, qubits, g.params());
    match kind {
        0 => Box::new(SwapEncoding::new(g, ansatz, random_state_circuit(rng, qubits)).unwrap()),
        1 => Box::new(HadamardEncoding::new(g, ansatz, pauli(qubits, FixedGate::Z, qubits - 1)).unwrap()),
        _ => {
            let w = rng.gen_range(0.1..0.9);
            let terms = vec![
                term(w, pauli(qubits, FixedGate::Z, 0)),
                term(1.0 - w, pauli(qubits, FixedGate::X, qubits - 1)),
            ];
            Box::new(LcuEncoding::new(g, ansatz, terms).unwrap())
        }
    }
}

fn spectral_relation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let instances = 120;
    for i in 0..instances {
        let qubits = 1 + i % 2;
        let enc = random_encoding(&mut rng, qubits, grid(1, 2), i % 3);
        for j in 0..enc.grid().size() {
            let e = enc.reference_value(&enc.grid().angles(j)).unwrap();
            for p in block_eigenphases(enc.as_ref(), GroverVariant::G, j).unwrap() {
                worst = worst.max((p.cos() + e).abs());
            }
        }
    }
    ensure(worst < 1e-8, || format!("max |cos ψ + C| = {worst:.3e}"))?;
    Ok(format!("{instances} instances, max |cos ψ + C| = {worst:.2e}"))
}

fn block_deviation(full: &dyn AmplitudeEncoding, single: &dyn Fn(&[f64]) -> Box<dyn AmplitudeEncoding>) -> f64 {
    let g = full.grid();
    let layout = encoding_layout(full, 0, &[]).unwrap();
    let u = operator_matrix(&layout, |s| full.prepare(s, false, &[])).unwrap();
    let gm = operator_matrix(&layout, |s| apply_grover_op(s, full, GroverVariant::G, 1)).unwrap();
    let wdim = layout.dim() >> g.total_bits();
    let mut worst: f64 = 0.0;
    for j in 0..g.size() {
        let one = single(&g.angles(j));
        let sl = encoding_layout(one.as_ref(), 0, &[]).unwrap();
        let uj = operator_matrix(&sl, |s| one.prepare(s, false, &[])).unwrap();
        let gj = operator_matrix(&sl, |s| apply_grover_op(s, one.as_ref(), GroverVariant::G, 1)).unwrap();
        for k in 0..g.size() {
            for r in 0..wdim {
                for c in 0..wdim {
                    let (bu, bg) = (u[(j * wdim + r, k * wdim + c)], gm[(j * wdim + r, k * wdim + c)]);
                    let d = if j == k {
                        (bu - uj[(r, c)]).norm().max((bg - gj[(r, c)]).norm())
                    } else {
                        bu.norm().max(bg.norm())
                    };
                    worst = worst.max(d);
                }
            }
        }
    }
    worst
}

fn block_diagonal_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut grids = 0;
    for r in 1..=6 {
        for d in 1..=6 / r {
            let g = grid(r, d);
            let ansatz = random_ansatz(&mut rng, 1, r);
            let target = random_state_circuit(&mut rng, 1);
            let point = ParamGridSpec::new(0, 1).unwrap();
            let had = HadamardEncoding::new(g.clone(), ansatz.clone(), pauli(1, FixedGate::Z, 0)).unwrap();
            worst = worst.max(block_deviation(&had, &|a| {
                Box::new(HadamardEncoding::new(point.clone(), ansatz.bind(a).unwrap(), pauli(1, FixedGate::Z, 0)).unwrap())
            }));
            let swap = SwapEncoding::new(g.clone(), ansatz.clone(), target.clone()).unwrap();
            worst = worst.max(block_deviation(&swap, &|a| {
                Box::new(SwapEncoding::new(point.clone(), ansatz.bind(a).unwrap(), target.clone()).unwrap())
            }));
            grids += 1;
        }
    }
    ensure(worst < 1e-10, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("{grids} grids, max deviation {worst:.2e}"))
}

fn grover_oracle_fidelity() -> Check {
    let enc = toy_vqe();
    let c = costs(enc.as_ref());
    let oracle = GroverOracle::new(enc, Direction::Minimize, 8).unwrap();
    let layout = ThresholdOracle::layout(&oracle);
    let s0 = uniform(layout.clone());
    let mut worst_zero: f64 = 1.0;
    for threshold in [0.0, 0.5, -0.5] {
        let mut s = s0.clone();
        oracle.apply(&mut s, threshold).unwrap();
        for (j, cj) in c.iter().enumerate() {
            let i = layout.index_of(Register::Parameter, j).unwrap();
            let sign = (s.amplitudes()[i] / s0.amplitudes()[i]).re;
            let want = if *cj < threshold { -1.0 } else { 1.0 };
            ensure(sign.signum() == want && (sign - want).abs() < 1e-2, || {
                format!("threshold {threshold}: configuration {j} has sign {sign:.4}, want {want}")
            })?;
        }
        worst_zero = worst_zero.min(oracle.ancilla_zero_probability(&s));
    }
    ensure(worst_zero >= 0.99, || format!("ancilla-zero population {worst_zero:.4}"))?;
    Ok(format!("8/8 signs at three thresholds, ancilla-zero ≥ {worst_zero:.4}"))
}

fn ae_phase_oracle() -> Check {
    let ansatz = Circuit::new(2)
        .param(Axis::Y, 0, 0)
        .controlled_fixed(FixedGate::X, 0, 1)
        .param(Axis::Y, 1, 1);
    let terms = vec![term(0.5, pauli(2, FixedGate::Z, 0)), term(0.5, pauli(2, FixedGate::Z, 1))];
    let enc: Arc<dyn AmplitudeEncoding> = Arc::new(LcuEncoding::new(grid(2, 2), ansatz, terms).unwrap());
    let c = costs(enc.as_ref());
    let mut fids = Vec::new();
    for t in [6, 8, 10] {
        let oracle = AePhaseOracle::new(vec![enc.clone()], t).unwrap();
        let mut s = uniform(oracle.layout());
        oracle.apply(&mut s, 1.0).unwrap();
        let mut exact = uniform(oracle.layout());
        exact
            .apply_register_diagonal(Register::Parameter, |j| Complex64::from_polar(1.0, -c[j]))
            .unwrap();
        fids.push(s.fidelity(&exact).unwrap());
    }
    ensure(fids[1] >= 0.99, || format!("fidelity at t=8 is {:.4}", fids[1]))?;
    ensure(fids.windows(2).all(|w| w[1] + 1e-12 >= w[0]), || format!("fidelities {fids:?}"))?;
    Ok(format!("fidelity t=6,8,10: {:.4}, {:.4}, {:.4}", fids[0], fids[1], fids[2]))
}

fn lcu_phase_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let enc: Arc<dyn AmplitudeEncoding> = Arc::new(
        HadamardEncoding::new(grid(1, 1), random_ansatz(&mut rng, 1, 1), pauli(1, FixedGate::Z, 0)).unwrap(),
    );
    let g = enc.grid().clone();
    let exact = DMatrix::from_fn(2, 2, |j, k| {
        if j == k {
            let e = enc.reference_value(&g.angles(j)).unwrap();
            Complex64::from_polar(1.0, -(e - 1.0) / 2.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut errs = Vec::new();
    for m in [2, 4, 8, 12] {
        let oracle = LcuPhaseOracle::new(vec![enc.clone()], LcuSeriesSpec::new(m).unwrap()).unwrap();
        let block = parameter_block(&oracle.layout(), |s| oracle.apply_series(s)).unwrap();
        errs.push(operator_distance(&block, &exact));
    }
    let last = *errs.last().unwrap();
    ensure(last < 1e-3, || format!("distance at M=12 is {last:.3e}"))?;
    ensure(errs.windows(2).all(|w| w[1] <= w[0]), || format!("distances {errs:?}"))?;
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    Ok(format!("distance M=2,4,8,12: {}", shown.join(", ")))
}

fn gas_end_to_end() -> Check {
    let g = ParamGridSpec::with_max_angles(3, vec![PI, PI / 8.0]).unwrap();
    let ansatz = Circuit::new(1).param(Axis::Y, 0, 0).param(Axis::Y, 0, 1);
    let enc = HadamardEncoding::new(g, ansatz, pauli(1, FixedGate::Z, 0)).unwrap();
    let c = costs(&enc);
    let optimum = (0..c.len()).fold(0, |b, j| if c[j] < c[b] { j } else { b });
    let oracle = IdealThresholdOracle::new(c.clone(), Direction::Minimize).unwrap();
    let eval = TableEvaluator::new(c);
    let counters = CounterModel { cqnn_per_call: 1, qnn_per_eval: 1 };
    let mut calls = 0;
    for seed in 0..50 {
        let cfg = GasConfig { seed, ..GasConfig::default() };
        let r = gas_run(&oracle, &eval, Direction::Minimize, counters, &cfg).unwrap();
        ensure(r.best_index == optimum, || format!("seed {seed} returned {}", r.best_index))?;
        let th = r.thresholds();
        ensure(th.windows(2).all(|w| w[1] < w[0]), || format!("seed {seed} thresholds {th:?}"))?;
        calls += r.calls_to_best;
    }
    let mean = calls as f64 / 50.0;
    ensure(mean <= 4.0 * 64f64.sqrt(), || format!("mean oracle calls {mean}"))?;
    Ok(format!("50/50 seeds found j={optimum}, mean oracle calls {mean:.2}"))
}

fn acqaoa_amplification() -> Check {
    let g = grid(1, 3);
    let c = costs(toy_vqe().as_ref());
    let oracle: Arc<dyn PhaseOracle> = Arc::new(IdealPhaseOracle::new(c.clone()).unwrap());
    let problem = QaoaProblem::new(oracle, g.clone(), c, Direction::Minimize, &default_pool(&g)).unwrap();
    let baseline = problem.optimal().len() as f64 / 8.0;
    let (_, p0) = qaoa_run(&problem, &QaoaSchedule::default()).unwrap();
    ensure((p0.success_probability - baseline).abs() < 1e-15, || format!("p=0 success {}", p0.success_probability))?;
    let trained = hyperparam_optimize(&problem, &QaoaConfig::new(2)).unwrap();
    let (_, p2) = qaoa_run(&problem, &trained.schedule).unwrap();
    ensure(p2.success_probability >= 2.0 * baseline, || format!("p=2 success {}", p2.success_probability))?;
    Ok(format!("p=0 {:.4}, p=2 {:.4}", p0.success_probability, p2.success_probability))
}

fn resource_formulas() -> Check {
    let q = qubit_count(5, 5, 10, 1e-8, None).map_err(|e| e.to_string())?;
    ensure((58..=62).contains(&q), || format!("qubit count {q}"))?;
    let (eps0, eps1, eps2, r) = (1.0 / 32.0, 0.1, 1.0 / 64.0, 10);
    let res = gas_resources(eps0, eps1, eps2, r, 1.0).map_err(|e| e.to_string())?;
    ensure(res.configurations == (1.0 / eps0).powi(r as i32), || format!("N = {}", res.configurations))?;
    let small = 2.0 / (eps2 * eps1);
    ensure((res.n0_small_eps1 - small).abs() < 1e-9, || format!("N₀ = {}", res.n0_small_eps1))?;
    for e1 in [0.1, 1e-2, 1e-3] {
        let res = gas_resources(eps0, e1, eps2, r, 1.0).map_err(|e| e.to_string())?;
        let rel = (res.n0_approx / res.n0_small_eps1 - 1.0).abs();
        ensure(rel <= 4.0 * e1, || format!("ε₁={e1}: relative gap {rel:.3e}"))?;
    }
    Ok(format!("{q} qubits, N = 2^50, N₀ ≈ {small}"))
}

fn mixer_correctness() -> Check {
    let s1 = build_mixer_matrix(MixerKind::S, 1).map_err(|e| e.to_string())?;
    let want = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(-0.5, 0.0), c(-0.5, 0.0), c(0.5, 0.0)]);
    let d = operator_distance(&s1, &want);
    ensure(d < 1e-12, || format!("S(1) deviates by {d:.3e}"))?;
    for bits in 1..=4 {
        let d = operator_distance(&position_pauli_sum(bits), &position_matrix(bits));
        let n = 1usize << bits;
        let ramp = (0..n).all(|i| (position_matrix(bits)[(i, i)] - c(i as f64, 0.0)).norm() < 1e-15);
        ensure(d < 1e-12 && ramp, || format!("J Pauli sum at {bits} bits deviates by {d:.3e}"))?;
    }
    for bits in 1..=3 {
        let n = 1usize << bits;
        let s = build_mixer_matrix(MixerKind::S, bits).map_err(|e| e.to_string())?;
        let u = dense_exponential(&s, 2.0 * PI / n as f64);
        for col in 0..n {
            let ones = (0..n).filter(|&r| (u[(r, col)] - c(1.0, 0.0)).norm() < 1e-10).count();
            let zeros = (0..n).filter(|&r| u[(r, col)].norm() < 1e-10).count();
            ensure(ones == 1 && zeros == n - 1, || format!("dimension {n}, column {col} is not a basis vector"))?;
        }
    }
    Ok("S(1) = (I−X)/2, J diagonal up to 4 bits, shifts for 2, 4, 8".into())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let task = json!({
        "problem": {"kind": "vqe", "terms": [{"weight": 1.0, "circuit": {"qubits": 1, "gates": [{"kind": "fixed", "gate": "z", "target": 0}]}}]},
        "ansatz": {"qubits": 1, "gates": [{"kind": "param", "axis": "y", "target": 0, "param": 0}]},
        "grid": {"params": 1, "bits": 3}
    });
    let mut checked = 0;
    for (name, optimizer, mode) in [
        ("gas", json!({"kind": "gas"}), "sampled"),
        ("acqaoa", json!({"kind": "acqaoa", "layers": 2}), "exact"),
    ] {
        let mut bytes = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{name}{rep}"));
            let cfg = json!({
                "version": 1,
                "task": task,
                "oracle": {"amplitude_bits": 6},
                "optimizer": optimizer,
                "seeds": [3, 11],
                "mode": mode,
                "out_dir": out,
            });
            let cfg = ExperimentConfig::from_json(&cfg.to_string()).map_err(|e| e.to_string())?;
            run_config(cfg).map_err(|e| e.to_string())?;
            bytes.push(std::fs::read(out.join(RUN_RECORDS)).map_err(|e| e.to_string())?);
        }
        ensure(!bytes[0].is_empty() && bytes[0] == bytes[1], || format!("{name} run records differ"))?;
        checked += 1;
    }
    Ok(format!("{checked} experiments reproduced byte for byte"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("spectral relation", spectral_relation),
        ("block-diagonal identities", block_diagonal_identities),
        ("grover oracle fidelity", grover_oracle_fidelity),
        ("phase oracle (amplitude estimation)", ae_phase_oracle),
        ("phase oracle (series)", lcu_phase_oracle),
        ("gas end to end", gas_end_to_end),
        ("ac-qaoa amplification", acqaoa_amplification),
        ("resource formulas", resource_formulas),
        ("mixer correctness", mixer_correctness),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
