//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `QREV_ACCEPTANCE=2,5` restricts the run to the listed criteria. Failures
//! are reported but only fail the process when `QREV_ACCEPTANCE_STRICT` is set.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use qrev::circuit::{Circuit, Gate, GateKind};
use qrev::linalg::Mat2;
use qrev::neural::{build_autoencoder, grad_check, train, Activation, LayerSpec, Mlp, TrainConfig};
use qrev::qnn::{build_ansatz, expectations, loss_and_gradient, reference_shapes, synthetic_blobs, AnsatzSpec, Dataset};
use qrev::recovery::{
    align_tags, evaluate, gen_dataset, grid_values, layer_sweep, recover_params_bf, template_circuit,
    train_recovery_model, EvalConfig, Method, ModelStore,
};
use qrev::simulator::{fuse_1q, permutation_unitary, unitary_of};
use qrev::structlut::{build_lut, recover_structure, LutRecord, SegmentSignature};
use qrev::transpiler::{decompose_1q, transpile, TranspileOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use GateKind::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Circuit {
    let one = [Rx, Ry, Rz, X, Sx, H, Id];
    let mut c = Circuit::new(n).unwrap();
    for _ in 0..len {
        if n > 1 && rng.random_bool(0.35) {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let g = if rng.random_bool(0.8) { Gate::cnot(a, b) } else { Gate::swap(a, b) };
            c.push(g).unwrap();
        } else {
            let k = one[rng.random_range(0..one.len())];
            let q = rng.random_range(0..n);
            let g = if k.is_rotation() {
                Gate::rotation(k, q, rng.random_range(-4.0 * PI..4.0 * PI))
            } else {
                Gate::new(k, &[q], None).unwrap()
            };
            c.push(g).unwrap();
        }
    }
    c
}

fn c1_transpiler() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let n = rng.random_range(1..=4);
        let len = rng.random_range(1..=40);
        let c = random_circuit(&mut rng, n, len);
        let level = (i % 2) as u8;
        let r = transpile(&c, &TranspileOptions::linear(n, level)).unwrap();
        let want = permutation_unitary(&r.final_layout).matmul(&unitary_of(&c).unwrap());
        worst = worst.max(unitary_of(&r.circuit).unwrap().max_abs_diff(&want));
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 60.0,
        format!("500 circuits, max deviation {worst:.2e} (≤ 1e-9), {secs:.1} s (< 60 s)"),
    )
}

fn haar(rng: &mut ChaCha8Rng) -> Mat2 {
    let mut g = || C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
    let (a, b, c, d) = (g(), g(), g(), g());
    let n1 = (a.norm_sqr() + c.norm_sqr()).sqrt();
    let (a, c) = (a / n1, c / n1);
    let proj = a.conj() * b + c.conj() * d;
    let (b, d) = (b - proj * a, d - proj * c);
    let n2 = (b.norm_sqr() + d.norm_sqr()).sqrt();
    Mat2::new(a, b / n2, c, d / n2)
}

fn c2_zsx() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let u = haar(&mut rng);
        let z = decompose_1q(&u).unwrap();
        worst = worst.max(z.recompose().max_abs_diff(&u));
    }
    let lut = build_lut(&[vec![Rx, Ry, Rz]], &TranspileOptions::linear(1, 1)).unwrap();
    let sig = SegmentSignature(vec![Rz, Sx, Rz, Sx, Rz]);
    let sig_ok = matches!(lut.records.get(&sig), Some(LutRecord::Entry(e)) if e.template == vec![Rx, Ry, Rz] && e.natural);
    outcome(
        worst <= 1e-9 && sig_ok,
        format!("1e5 Haar samples, max recomposition error {worst:.2e}; [rx,ry,rz] → rz,sx,rz,sx,rz: {sig_ok}"),
    )
}

fn c3_structure() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0;
    let mut exact = 0;
    for spec in reference_shapes() {
        let ansatz = build_ansatz(&spec).unwrap();
        for level in [0u8, 1] {
            let opts = TranspileOptions::linear(spec.n_qubits, level);
            let lut = build_lut(std::slice::from_ref(&spec.rotations), &opts).unwrap();
            for _ in 0..20 {
                let p: Vec<f64> = (0..spec.n_params()).map(|_| rng.random_range(-PI..PI)).collect();
                let out = transpile(&ansatz.bind_values(&p).unwrap(), &opts).unwrap().circuit;
                total += 1;
                if let Ok(s) = recover_structure(&out, &lut) {
                    if align_tags(&ansatz, &s.ansatz).is_ok() && s.n_params() == spec.n_params() {
                        exact += 1;
                    }
                }
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        exact == total && secs < 600.0,
        format!("9 shapes × 2 levels × 20 draws: {exact}/{total} exact, {secs:.1} s (< 600 s)"),
    )
}

fn c4_brute_force() -> Outcome {
    let grid = grid_values(0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = TranspileOptions::linear(1, 1);
    let templates: [&[GateKind]; 3] = [&[Ry], &[Ry, Rz], &[Rx, Ry, Rz]];
    let victims = [20usize, 6, 2];
    let mut worst: f64 = 0.0;
    let mut per_seg = Vec::new();
    for (t, &count) in templates.iter().zip(&victims) {
        let lut = build_lut(&[t.to_vec()], &opts).unwrap();
        let mut secs = 0.0;
        let mut segs = 0;
        for _ in 0..count {
            let p: Vec<f64> = (0..t.len()).map(|_| grid[rng.random_range(0..grid.len())]).collect();
            let victim = template_circuit(t, &p).unwrap();
            let s = recover_structure(&transpile(&victim, &opts).unwrap().circuit, &lut).unwrap();
            let (rec, stats) = recover_params_bf(&s, &opts, 0.1).unwrap();
            secs += stats.seconds;
            segs += stats.segments;
            let got = fuse_1q(template_circuit(t, &rec).unwrap().gates()).unwrap();
            worst = worst.max(got.phase_distance(&s.matches[0].fused_unitary().unwrap()));
        }
        per_seg.push(secs / segs as f64);
    }
    let r21 = per_seg[1] / per_seg[0] / 63.0;
    let r32 = per_seg[2] / per_seg[1] / 63.0;
    let ratios_ok = [r21, r32].iter().all(|r| (0.5..=2.0).contains(r));
    outcome(
        worst <= 1e-9 && ratios_ok,
        format!(
            "max segment distance {worst:.2e} (≤ 1e-9); per-segment s k=1,2,3: {:.2e}, {:.2e}, {:.2e}; measured/predicted ratios {r21:.2}, {r32:.2} (within ×2)",
            per_seg[0], per_seg[1], per_seg[2]
        ),
    )
}

fn eval_cfg(seed: u64) -> EvalConfig {
    EvalConfig {
        seed,
        ..Default::default()
    }
}

fn bundled(n_qubits: usize, seed: u64) -> Dataset {
    synthetic_blobs(120, n_qubits, seed).unwrap()
}

fn c5_autoencoder(store: &mut ModelStore) -> Outcome {
    let t0 = Instant::now();
    let ds = gen_dataset(&[Rx, Ry, Rz], 0.1).unwrap();
    let cfg = TrainConfig::default();
    let (mut model, trace) = train_recovery_model(&ds, &cfg).unwrap();
    model.dataset_seconds = t0.elapsed().as_secs_f64() - model.training_seconds;
    let secs = t0.elapsed().as_secs_f64();
    let mae_first = trace.val_mae[0];
    let mae_last = *trace.val_mae.last().unwrap();
    store.insert(vec![Rx, Ry, Rz], model);

    let s2 = AnsatzSpec::new(2, 1, vec![Rx, Ry, Rz]);
    let e2 = evaluate(&s2, &bundled(2, 5), Method::Autoencoder, &eval_cfg(5), store).unwrap();
    let s4 = AnsatzSpec::new(4, 2, vec![Ry, Rz]);
    let e4 = evaluate(&s4, &bundled(4, 5), Method::Autoencoder, &eval_cfg(5), store).unwrap();
    let m2 = e2.report.param_mean_abs_error.unwrap_or(f64::INFINITY);
    let m4 = e4.report.param_mean_abs_error.unwrap_or(f64::INFINITY);
    outcome(
        m2 <= 0.36 && m4 <= 1.0 && mae_last < mae_first && secs <= 7200.0 && ds.len() == 250_047,
        format!(
            "2Q 1-layer error {m2:.3} (≤ 0.36), 4Q 2-layer error {m4:.3} (≤ 1.0); val MAE {mae_first:.3} → {mae_last:.3}; k=3 grid {} rows, {} duplicate inputs, dataset+training {secs:.0} s (≤ 7200 s)",
            ds.len(),
            ds.duplicate_inputs
        ),
    )
}

fn c6_accuracy(store: &mut ModelStore) -> Outcome {
    let mut shapes = reference_shapes();
    shapes.push(AnsatzSpec::new(1, 1, vec![Rx, Ry, Rz]));
    let mut within = 0;
    let mut not_worse = 0;
    let mut worst_gap: f64 = 0.0;
    let mut rows = Vec::new();
    for (i, spec) in shapes.iter().enumerate() {
        let seed = 60 + i as u64;
        let ev = evaluate(spec, &bundled(spec.n_qubits, seed), Method::Autoencoder, &eval_cfg(seed), store).unwrap();
        let r = &ev.report;
        let gap = r.accuracy_original - r.accuracy_recovered;
        let gap_after = r.accuracy_original - r.acc_after_retraining;
        worst_gap = worst_gap.max(gap.abs());
        if gap.abs() * 100.0 <= 15.0 + 1e-9 {
            within += 1;
        }
        if gap_after <= gap + 1e-12 {
            not_worse += 1;
        }
        rows.push(format!(
            "{} {:.0}/{:.0}/{:.0}",
            r.classifier,
            r.accuracy_original * 100.0,
            r.accuracy_recovered * 100.0,
            r.acc_after_retraining * 100.0
        ));
    }
    outcome(
        within == shapes.len() && not_worse >= 8,
        format!(
            "{within}/{} within 15 pp (worst {:.1} pp); gap not increased after retraining {not_worse}/{} (≥ 8); orig/rec/retrained %: {}",
            shapes.len(),
            worst_gap * 100.0,
            shapes.len(),
            rows.join("; ")
        ),
    )
}

fn c7_scaling() -> Outcome {
    let data = bundled(4, 7);
    let cfg = EvalConfig {
        seed: 7,
        qnn_epochs: 3,
        ..Default::default()
    };
    let ae = layer_sweep(4, &[Ry, Rz], &[1, 2, 4, 8, 16], &[Method::Autoencoder], &data, &cfg, true).unwrap();
    let bf = layer_sweep(4, &[Ry, Rz], &[1, 2, 4], &[Method::BruteForce], &data, &cfg, true).unwrap();
    let ae_ratio = ae[4].total_s / ae[0].total_s;
    let bf_ratio = bf[2].total_s / bf[0].total_s;
    let fmt = |rows: &[qrev::recovery::BenchRow]| {
        rows.iter()
            .map(|r| format!("L{}={:.2}s", r.n_layers, r.total_s))
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        ae_ratio <= 2.0 && bf_ratio >= 10.0,
        format!(
            "AE 1→16 layers ×{ae_ratio:.2} (≤ 2) [{}]; BF 1→4 layers ×{bf_ratio:.1} (≥ 10) [{}]",
            fmt(&ae),
            fmt(&bf)
        ),
    )
}

fn c8_neural() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let specs = vec![
        LayerSpec::dense(12, Activation::Relu),
        LayerSpec::BatchNorm,
        LayerSpec::dense(8, Activation::None),
        LayerSpec::dense(6, Activation::Relu),
        LayerSpec::dense(3, Activation::None),
    ];
    let m = Mlp::new(3, specs, 8).unwrap();
    let x = Array2::from_shape_simple_fn((16, 3), || rng.random_range(-2.0..2.0));
    let y = Array2::from_shape_simple_fn((16, 3), || rng.random_range(-2.0..2.0));
    let gc = grad_check(&m, x.view(), y.view(), 1e-6).unwrap();

    let want = [1024, 1024, 32896, 512, 8256, 2080, 528, 544, 128, 2112, 256, 8320, 33024, 771];
    let got: Vec<usize> = build_autoencoder(3, 3, 0)
        .unwrap()
        .param_counts()
        .into_iter()
        .filter(|&c| c > 0)
        .collect();
    let counts_ok = got == want;

    let run = || {
        let mut m = build_autoencoder(3, 3, 21).unwrap();
        let cfg = TrainConfig {
            epochs: 2,
            batch_size: 32,
            seed: 21,
            ..Default::default()
        };
        let mut r = ChaCha8Rng::seed_from_u64(0);
        let x = Array2::from_shape_simple_fn((200, 3), || r.random_range(-3.0..3.0));
        let y = x.mapv(|v: f64| v.sin());
        train(&mut m, x.view(), y.view(), &cfg).unwrap();
        m.params_flat()
    };
    let a = run();
    let b = run();
    let bitwise = a.len() == b.len() && a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits());
    outcome(
        gc.max_rel_error < 1e-4 && counts_ok && bitwise,
        format!(
            "grad check max rel error {:.2e} (< 1e-4); parameter counts match: {counts_ok}; seeded runs bitwise equal: {bitwise}",
            gc.max_rel_error
        ),
    )
}

fn c9_qnn() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let specs = [
        AnsatzSpec::new(1, 2, vec![Rx, Ry, Rz]),
        AnsatzSpec::new(2, 2, vec![Rx, Ry, Rz]),
        AnsatzSpec::new(2, 3, vec![Rx, Ry, Rz]),
        AnsatzSpec::new(4, 3, vec![Ry, Rz]),
        AnsatzSpec::new(3, 4, vec![Rz, Rx]),
    ];
    let mut worst: f64 = 0.0;
    let mse = |e: &[f64], ds: &Dataset| {
        e.iter().enumerate().map(|(i, v)| (v - ds.target(i)).powi(2)).sum::<f64>() / ds.len() as f64
    };
    for spec in &specs {
        let c = build_ansatz(spec).unwrap();
        let ds = synthetic_blobs(6, spec.n_qubits, rng.random()).unwrap();
        let p: Vec<f64> = (0..spec.n_params()).map(|_| rng.random_range(-PI..PI)).collect();
        let (_, g) = loss_and_gradient(&c, &p, &ds).unwrap();
        let h = 1e-5;
        for t in 0..p.len() {
            let mut q = p.clone();
            q[t] += h;
            let up = mse(&expectations(&c, &q, &ds).unwrap(), &ds);
            q[t] -= 2.0 * h;
            let down = mse(&expectations(&c, &q, &ds).unwrap(), &ds);
            worst = worst.max(((up - down) / (2.0 * h) - g[t]).abs());
        }
    }
    let max_params = specs.iter().map(|s| s.n_params()).max().unwrap();
    outcome(
        worst <= 1e-6,
        format!("{} models up to {max_params} parameters, max |shift − FD| {worst:.2e} (≤ 1e-6)", specs.len()),
    )
}

fn main() {
    let selected: Option<BTreeSet<u32>> = std::env::var("QREV_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let want = |i: u32| selected.as_ref().is_none_or(|s| s.contains(&i));
    let mut store = ModelStore::new();
    let mut failed = 0;
    let mut report = |i: u32, name: &str, run: &mut dyn FnMut() -> Outcome| {
        if !want(i) {
            return;
        }
        let t0 = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{tag} criterion {i} ({name}): {} [{:.1} s]", o.detail, t0.elapsed().as_secs_f64());
    };
    report(1, "transpiler soundness", &mut c1_transpiler);
    report(2, "ZSX decomposition", &mut c2_zsx);
    report(3, "structure recovery", &mut c3_structure);
    report(4, "brute-force baseline", &mut c4_brute_force);
    report(5, "autoencoder error", &mut || c5_autoencoder(&mut store));
    report(6, "end-to-end accuracy gap", &mut || c6_accuracy(&mut store));
    report(7, "countermeasure scaling", &mut c7_scaling);
    report(8, "neural engine", &mut c8_neural);
    report(9, "QNN gradients", &mut c9_qnn);
    println!("{failed} criteria failed");
    if failed > 0 && std::env::var_os("QREV_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
