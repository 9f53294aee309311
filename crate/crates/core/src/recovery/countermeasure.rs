use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::evaluate::{ensure_models, recover, spec_templates, EvalConfig, Method};
use super::model::ModelStore;
use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::qnn::{accuracy, split, train_qnn, AnsatzSpec, Dataset, TrainedQnn};
use crate::structlut::Template;
use crate::transpiler::transpile;

pub const MAX_DUMMY_QUBITS: usize = 4;
pub const MAX_EXTRA_LAYERS: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Countermeasure {
    pub dummy_qubits: usize,
    pub extra_layers: usize,
}

impl Countermeasure {
    pub fn validate(&self) -> Result<()> {
        if self.dummy_qubits > MAX_DUMMY_QUBITS || self.extra_layers > MAX_EXTRA_LAYERS {
            return Err(Error::Precondition(format!(
                "countermeasure (d={}, e={}) exceeds caps d ≤ {MAX_DUMMY_QUBITS}, e ≤ {MAX_EXTRA_LAYERS}",
                self.dummy_qubits, self.extra_layers
            )));
        }
        Ok(())
    }
}

fn chain(c: &mut Circuit, qubits: std::ops::Range<usize>, reverse: bool) -> Result<()> {
    let pairs: Vec<usize> = qubits.clone().take(qubits.len().saturating_sub(1)).collect();
    let order: Box<dyn Iterator<Item = usize>> = if reverse {
        Box::new(pairs.into_iter().rev())
    } else {
        Box::new(pairs.into_iter())
    };
    for q in order {
        c.push(Gate::cnot(q, q + 1))?;
    }
    Ok(())
}

/// Bound victim plus `d` dummy qubits (random rotations, CNOT chain among
/// themselves only) and `e` appended `L·L†` pairs on the real qubits.
pub fn augment(victim: &TrainedQnn, cm: Countermeasure, seed: u64) -> Result<Circuit> {
    cm.validate()?;
    let spec = &victim.spec;
    let n = spec.n_qubits;
    let w = n + cm.dummy_qubits;
    let mut c = victim.bound()?.widened(w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if cm.dummy_qubits > 0 {
        for layer in 0..spec.n_layers {
            for q in n..w {
                for &k in spec.rotations_for(layer) {
                    c.push(Gate::rotation(k, q, rng.random_range(-PI..PI)))?;
                }
            }
            chain(&mut c, n..w, false)?;
        }
    }
    for _ in 0..cm.extra_layers {
        let mut block: Vec<Vec<(GateKind, f64)>> = Vec::with_capacity(n);
        for q in 0..n {
            let rots: Vec<(GateKind, f64)> = spec
                .rotations
                .iter()
                .map(|&k| (k, rng.random_range(-PI..PI)))
                .collect();
            for &(k, a) in &rots {
                c.push(Gate::rotation(k, q, a))?;
            }
            block.push(rots);
        }
        chain(&mut c, 0..n, false)?;
        chain(&mut c, 0..n, true)?;
        for (q, rots) in block.iter().enumerate() {
            for &(k, a) in rots.iter().rev() {
                c.push(Gate::rotation(k, q, -a))?;
            }
        }
    }
    Ok(c)
}

/// Templates an adversary needs for an augmented victim: the base ones and
/// their reversals (the `L†` halves).
pub fn augmented_templates(spec: &AnsatzSpec) -> Vec<Template> {
    let mut out = spec_templates(spec);
    for t in spec_templates(spec) {
        let r: Template = t.iter().rev().copied().collect();
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub classifier: String,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub dummy_qubits: usize,
    pub extra_layers: usize,
    pub method: Method,
    pub transpiled_gates: usize,
    pub n_params_recovered: usize,
    /// One-off model cost of the templates this row used (autoencoder only).
    pub dataset_s: f64,
    pub training_s: f64,
    pub recovery_s: f64,
    pub total_s: f64,
    pub accuracy_original: f64,
    pub accuracy_recovered: f64,
    pub acc_error_pct: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates_evaluated: Option<usize>,
}

#[allow(clippy::too_many_arguments)]
fn bench_row(
    victim: &TrainedQnn,
    circuit: &Circuit,
    cm: Countermeasure,
    templates: &[Template],
    method: Method,
    eval_ds: &Dataset,
    cfg: &EvalConfig,
    store: &mut ModelStore,
) -> Result<BenchRow> {
    let opts = cfg.transpile.with_width(circuit.n_qubits());
    let transpiled = transpile(circuit, &opts)?.circuit;
    let t0 = Instant::now();
    let rec = recover(&transpiled, templates, &opts, method, store, cfg)?;
    let recovery_s = t0.elapsed().as_secs_f64() - rec.timings.dataset_s - rec.timings.training_s;
    let (dataset_s, training_s) = match method {
        Method::Autoencoder => {
            let used: BTreeSet<&Template> = rec.structure.matches.iter().map(|m| &m.template).collect();
            used.iter().fold((0.0, 0.0), |(d, t), tpl| {
                let m = &store[*tpl];
                (d + m.dataset_seconds, t + m.training_seconds)
            })
        }
        Method::BruteForce => (0.0, 0.0),
    };
    let accuracy_original = accuracy(&victim.ansatz, &victim.params, eval_ds)?;
    let accuracy_recovered = accuracy(&rec.structure.ansatz, &rec.params, eval_ds)?;
    Ok(BenchRow {
        classifier: victim.spec.label(),
        n_qubits: victim.spec.n_qubits,
        n_layers: victim.spec.n_layers,
        dummy_qubits: cm.dummy_qubits,
        extra_layers: cm.extra_layers,
        method,
        transpiled_gates: transpiled.len(),
        n_params_recovered: rec.structure.n_params(),
        dataset_s,
        training_s,
        recovery_s,
        total_s: dataset_s + training_s + recovery_s,
        accuracy_original,
        accuracy_recovered,
        acc_error_pct: (accuracy_original - accuracy_recovered).abs() * 100.0,
        candidates_evaluated: rec.brute_force.map(|s| s.candidates_evaluated),
    })
}

/// Recover the base victim under every countermeasure with every method.
pub fn bench_countermeasures(
    base: &AnsatzSpec,
    grid: &[Countermeasure],
    methods: &[Method],
    data: &Dataset,
    cfg: &EvalConfig,
    store: &mut ModelStore,
) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    for cm in grid {
        cm.validate()?;
    }
    let (train_ds, eval_ds) = split(data, cfg.eval_fraction, cfg.seed)?;
    let victim = train_qnn(base, &train_ds, cfg.qnn_epochs, cfg.qnn_lr, cfg.seed)?;
    let templates = augmented_templates(base);
    if methods.contains(&Method::Autoencoder) {
        let all: BTreeSet<Template> = templates.iter().cloned().collect();
        ensure_models(&all, store, cfg.grid_step, &cfg.ae)?;
    }
    let mut rows = Vec::new();
    for (i, &cm) in grid.iter().enumerate() {
        let circuit = augment(&victim, cm, cfg.seed.wrapping_add(1 + i as u64))?;
        for &m in methods {
            rows.push(bench_row(&victim, &circuit, cm, &templates, m, &eval_ds, cfg, store)?);
        }
    }
    Ok(rows)
}

/// Recovery cost of one classifier width over several depths. With
/// `fresh_models` every depth rebuilds its autoencoders from scratch.
pub fn layer_sweep(
    n_qubits: usize,
    rotations: &[GateKind],
    layers: &[usize],
    methods: &[Method],
    data: &Dataset,
    cfg: &EvalConfig,
    fresh_models: bool,
) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let (train_ds, eval_ds) = split(data, cfg.eval_fraction, cfg.seed)?;
    let mut store = ModelStore::new();
    let mut rows = Vec::new();
    for &l in layers {
        let spec = AnsatzSpec::new(n_qubits, l, rotations.to_vec());
        let victim = train_qnn(&spec, &train_ds, cfg.qnn_epochs, cfg.qnn_lr, cfg.seed)?;
        let circuit = victim.bound()?;
        let templates = spec_templates(&spec);
        for &m in methods {
            if fresh_models && m == Method::Autoencoder {
                store.clear();
            }
            rows.push(bench_row(
                &victim,
                &circuit,
                Countermeasure::default(),
                &templates,
                m,
                &eval_ds,
                cfg,
                &mut store,
            )?);
        }
    }
    Ok(rows)
}
