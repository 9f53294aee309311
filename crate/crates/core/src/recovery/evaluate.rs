use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::brute::{recover_params_bf, BfStats};
use super::dataset::gen_dataset;
use super::model::{recover_params_ae, train_recovery_model, ModelStore};
use crate::circuit::{wrap_angle, Circuit};
use crate::error::{Error, Result};
use crate::neural::TrainConfig;
use crate::qnn::{accuracy, split, train_circuit, train_qnn, AnsatzSpec, Dataset, TrainedQnn};
use crate::structlut::{build_lut, kinds_to_string, recover_structure, RecoveredStructure, Template};
use crate::transpiler::{transpile, TranspileOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Autoencoder,
    BruteForce,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Autoencoder => "autoencoder",
            Method::BruteForce => "brute_force",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "ae" | "autoencoder" => Ok(Method::Autoencoder),
            "brute" | "bf" | "brute_force" => Ok(Method::BruteForce),
            _ => Err(Error::Precondition(format!("unknown recovery method `{s}` (ae | brute)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub seed: u64,
    pub eval_fraction: f64,
    pub qnn_epochs: usize,
    pub qnn_lr: f64,
    pub retrain_epochs: usize,
    pub retrain_lr: f64,
    /// Victim transpile options; linear maps are resized to the circuit.
    pub transpile: TranspileOptions,
    pub grid_step: f64,
    pub bf_step: f64,
    pub ae: TrainConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            seed: 0,
            eval_fraction: 0.25,
            qnn_epochs: 30,
            qnn_lr: 0.05,
            retrain_epochs: 30,
            retrain_lr: 0.05,
            transpile: TranspileOptions::linear(1, 1),
            grid_step: 0.1,
            bf_step: 0.1,
            ae: TrainConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        self.transpile.validate()?;
        self.ae.validate()?;
        if !(self.eval_fraction > 0.0 && self.eval_fraction < 1.0) {
            return Err(Error::Precondition("eval_fraction must be in (0, 1)".into()));
        }
        for (name, v) in [
            ("grid_step", self.grid_step),
            ("bf_step", self.bf_step),
            ("qnn_lr", self.qnn_lr),
            ("retrain_lr", self.retrain_lr),
        ] {
            if !(v.is_finite() && v >= 0.0) || (name.ends_with("step") && v == 0.0) {
                return Err(Error::Precondition(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub victim_training_s: f64,
    pub transpile_s: f64,
    pub structure_s: f64,
    pub dataset_s: f64,
    pub training_s: f64,
    pub recovery_s: f64,
    pub retraining_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub classifier: String,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub n_params: usize,
    pub method: Method,
    pub optimization_level: u8,
    pub seed: u64,
    /// Recovered rotation kinds and CNOT positions equal the original's.
    pub structure_exact: bool,
    /// `None` when the structures differ and tags cannot be paired.
    pub param_mean_abs_error: Option<f64>,
    pub param_error_std: Option<f64>,
    pub accuracy_original: f64,
    pub accuracy_recovered: f64,
    pub acc_error_pct: f64,
    pub acc_after_retraining: f64,
    pub diff_acc_pct: f64,
    pub timings: PhaseTimings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_force: Option<BfStats>,
}

/// Everything an `evaluate` run produced.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: RecoveryReport,
    pub victim: TrainedQnn,
    pub transpiled: Circuit,
    pub structure: RecoveredStructure,
    /// Indexed by recovered-ansatz tag.
    pub recovered_params: Vec<f64>,
    pub retrained_params: Vec<f64>,
}

/// Distinct rotation templates used by any layer, in first-use order.
pub fn spec_templates(spec: &AnsatzSpec) -> Vec<Template> {
    let mut out: Vec<Template> = Vec::new();
    for l in 0..spec.n_layers {
        let t = spec.rotations_for(l).to_vec();
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Generate and train models for every template in `templates` missing from
/// `store`. Returns `(dataset seconds, training seconds)` spent.
pub fn ensure_models(
    templates: &BTreeSet<Template>,
    store: &mut ModelStore,
    step: f64,
    cfg: &TrainConfig,
) -> Result<(f64, f64)> {
    let (mut ds_s, mut tr_s) = (0.0, 0.0);
    for t in templates {
        if store.contains_key(t) {
            continue;
        }
        let t0 = Instant::now();
        let ds = gen_dataset(t, step)?;
        let d = t0.elapsed().as_secs_f64();
        let (mut model, _) = train_recovery_model(&ds, cfg)?;
        model.dataset_seconds = d;
        ds_s += d;
        tr_s += model.training_seconds;
        store.insert(t.clone(), model);
    }
    Ok((ds_s, tr_s))
}

/// For each original tag, the recovered tag sitting at the same place in
/// the canonical gate order.
pub fn align_tags(original: &Circuit, recovered: &Circuit) -> Result<Vec<usize>> {
    let a = original.canonical_order();
    let b = recovered.canonical_order();
    let mismatch = || {
        Error::StructureMismatch(format!(
            "recovered ansatz has {} gates in a different arrangement than the original's {}",
            b.len(),
            a.len()
        ))
    };
    if a.len() != b.len() {
        return Err(mismatch());
    }
    let mut map = vec![usize::MAX; original.tags().len()];
    for (ga, gb) in a.iter().zip(&b) {
        if ga.kind() != gb.kind() || ga.qubits() != gb.qubits() {
            return Err(mismatch());
        }
        match (ga.tag(), gb.tag()) {
            (Some(ta), Some(tb)) => map[ta] = tb,
            (None, None) => {}
            _ => return Err(mismatch()),
        }
    }
    Ok(map)
}

/// Mean and population standard deviation of wrapped differences.
pub fn wrapped_error_stats(original: &[f64], recovered: &[f64]) -> (f64, f64) {
    let errs: Vec<f64> = original
        .iter()
        .zip(recovered)
        .map(|(o, r)| wrap_angle(r - o).abs())
        .collect();
    let n = errs.len().max(1) as f64;
    let mean = errs.iter().sum::<f64>() / n;
    let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Parameters recovered for an already transpiled victim.
pub struct Recovery {
    pub structure: RecoveredStructure,
    pub params: Vec<f64>,
    pub timings: PhaseTimings,
    pub brute_force: Option<BfStats>,
}

/// Structure and parameter recovery of a bound, transpiled victim.
pub fn recover(
    transpiled: &Circuit,
    templates: &[Template],
    opts: &TranspileOptions,
    method: Method,
    store: &mut ModelStore,
    cfg: &EvalConfig,
) -> Result<Recovery> {
    let mut timings = PhaseTimings::default();
    let t0 = Instant::now();
    let lut = build_lut(templates, opts)?;
    let structure = recover_structure(transpiled, &lut)?;
    timings.structure_s = t0.elapsed().as_secs_f64();
    let (params, brute_force) = match method {
        Method::Autoencoder => {
            let needed: BTreeSet<Template> = structure.matches.iter().map(|m| m.template.clone()).collect();
            let (d, t) = ensure_models(&needed, store, cfg.grid_step, &cfg.ae)?;
            timings.dataset_s = d;
            timings.training_s = t;
            let t0 = Instant::now();
            let p = recover_params_ae(&structure, store)?;
            timings.recovery_s = t0.elapsed().as_secs_f64();
            (p, None)
        }
        Method::BruteForce => {
            let t0 = Instant::now();
            let (p, stats) = recover_params_bf(&structure, opts, cfg.bf_step)?;
            timings.recovery_s = t0.elapsed().as_secs_f64();
            (p, Some(stats))
        }
    };
    Ok(Recovery {
        structure,
        params,
        timings,
        brute_force,
    })
}

/// Train a victim, transpile it, recover it, score it, retrain it.
pub fn evaluate(
    spec: &AnsatzSpec,
    data: &Dataset,
    method: Method,
    cfg: &EvalConfig,
    store: &mut ModelStore,
) -> Result<Evaluation> {
    cfg.validate()?;
    spec.validate()?;
    let (train_ds, eval_ds) = split(data, cfg.eval_fraction, cfg.seed)?;

    let t0 = Instant::now();
    let victim = train_qnn(spec, &train_ds, cfg.qnn_epochs, cfg.qnn_lr, cfg.seed)?;
    let victim_training_s = t0.elapsed().as_secs_f64();

    let opts = cfg.transpile.with_width(spec.n_qubits);
    let t0 = Instant::now();
    let transpiled = transpile(&victim.bound()?, &opts)?.circuit;
    let transpile_s = t0.elapsed().as_secs_f64();

    let templates = spec_templates(spec);
    let rec = recover(&transpiled, &templates, &opts, method, store, cfg).map_err(|e| match e {
        Error::UnmatchedSegment { .. } | Error::Ambiguous { .. } => e,
        other => Error::StructureMismatch(format!("recovering {}: {other}", spec.label())),
    })?;

    let (structure_exact, mean, std) = match align_tags(&victim.ansatz, &rec.structure.ansatz) {
        Ok(map) => {
            let aligned: Vec<f64> = map.iter().map(|&t| rec.params[t]).collect();
            let (m, s) = wrapped_error_stats(&victim.params, &aligned);
            (true, Some(m), Some(s))
        }
        Err(_) => (false, None, None),
    };

    let accuracy_original = accuracy(&victim.ansatz, &victim.params, &eval_ds)?;
    let accuracy_recovered = accuracy(&rec.structure.ansatz, &rec.params, &eval_ds)?;
    let t0 = Instant::now();
    let (retrained, _) = train_circuit(
        &rec.structure.ansatz,
        &rec.params,
        &train_ds,
        cfg.retrain_epochs,
        cfg.retrain_lr,
    )?;
    let retraining_s = t0.elapsed().as_secs_f64();
    let acc_after_retraining = accuracy(&rec.structure.ansatz, &retrained, &eval_ds)?;

    let mut timings = rec.timings;
    timings.victim_training_s = victim_training_s;
    timings.transpile_s = transpile_s;
    timings.retraining_s = retraining_s;

    let report = RecoveryReport {
        classifier: spec.label(),
        n_qubits: spec.n_qubits,
        n_layers: spec.n_layers,
        n_params: rec.structure.n_params(),
        method,
        optimization_level: opts.optimization_level,
        seed: cfg.seed,
        structure_exact,
        param_mean_abs_error: mean,
        param_error_std: std,
        accuracy_original,
        accuracy_recovered,
        acc_error_pct: (accuracy_original - accuracy_recovered).abs() * 100.0,
        acc_after_retraining,
        diff_acc_pct: (accuracy_original - acc_after_retraining).abs() * 100.0,
        timings,
        brute_force: rec.brute_force,
    };
    Ok(Evaluation {
        report,
        victim,
        transpiled,
        structure: rec.structure,
        recovered_params: rec.params,
        retrained_params: retrained,
    })
}

/// `rx,ry,rz`-style label of every template in `store`.
pub fn store_summary(store: &ModelStore) -> Vec<String> {
    store.keys().map(|t| kinds_to_string(t)).collect()
}
