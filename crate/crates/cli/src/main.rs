//! `qrev` command-line driver.

mod config;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qrev::circuit::{parse, serialize, Circuit};
use qrev::qnn::{load_idx, params_to_text, split, subsample, synthetic_blobs, train_qnn, Dataset};
use qrev::recovery::{
    bench_countermeasures, evaluate, gen_dataset, recover_params_ae, recover_params_bf, spec_templates,
    train_recovery_model, BenchRow, Method, ModelStore, ParamDataset, RecoveryModel, RecoveryReport,
};
use qrev::structlut::{build_lut, kinds_from_str, kinds_to_string, recover_structure, Lut, Template};
use qrev::transpiler::transpile;
use serde_json::{json, Value};

use config::{ConfigError, DataSource, RunConfig};

#[derive(Parser)]
#[command(name = "qrev", version, about = "Reverse engineering of transpiled variational-circuit classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config field by dotted path, e.g. `--set ansatz.n_layers=2`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the victim classifier.
    TrainQnn(Common),
    /// Transpile a bound circuit to the basis set.
    Transpile {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// Build the adversary's look-up table.
    BuildLut {
        #[command(flatten)]
        common: Common,
        /// Templates separated by `;`, e.g. `rx,ry,rz;ry,rz`.
        #[arg(long)]
        templates: Option<String>,
    },
    /// Recover the rotation structure of a transpiled circuit.
    RecoverStructure {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long)]
        lut: Option<PathBuf>,
    },
    /// Generate the grid dataset of a template.
    GenAeDataset {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        template: Option<String>,
    },
    /// Train the recovery autoencoder of a template.
    TrainAe {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        template: Option<String>,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Recover the parameters of a transpiled circuit.
    RecoverParams {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = ["ae", "autoencoder", "brute", "bf", "brute_force"])]
        method: String,
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long)]
        lut: Option<PathBuf>,
        /// Directory holding `model_<template>.txt` files.
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Train, transpile, recover and score a classifier end to end.
    Evaluate(Common),
    /// Recovery cost under dummy-qubit and extra-layer countermeasures.
    BenchCountermeasures(Common),
    /// Merge `report.csv` files of earlier runs.
    Report {
        #[arg(long)]
        out: PathBuf,
        /// Run directories or report.csv files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

enum Failure {
    Config(ConfigError),
    Core(qrev::Error),
    Input(String),
}

impl From<qrev::Error> for Failure {
    fn from(e: qrev::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(qrev::Error::Io(e))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

impl Failure {
    fn exit_code(&self) -> u8 {
        use qrev::Error as E;
        match self {
            Failure::Config(_) => 2,
            Failure::Input(_) => 2,
            Failure::Core(e) => match e {
                E::UnmatchedSegment { .. }
                | E::Ambiguous { .. }
                | E::StructureMismatch(_)
                | E::MissingModel(_)
                | E::NonBasis { .. } => 3,
                E::TrainingDiverged { .. } => 4,
                _ => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(e) => format!("config error: {e}"),
            Failure::Input(m) => format!("input error: {m}"),
            Failure::Core(e) => format!("error: {e}"),
        }
    }
}

/// Resolved configuration plus output locations of one invocation.
struct Run {
    cfg: RunConfig,
    out: PathBuf,
    hash: String,
}

impl Run {
    fn start(common: &Common) -> Res<Run> {
        let mut cfg = RunConfig::load(common.config.as_deref(), &common.set)?;
        if let Some(o) = &common.out {
            cfg.output_dir = o.clone();
        }
        if cfg.workers > 0 {
            // A second call in the same process fails; the first setting stays.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global();
        }
        let out = cfg.output_dir.clone();
        std::fs::create_dir_all(out.join("artifacts"))?;
        let hash = cfg.hash();
        let run = Run { cfg, out, hash };
        let resolved = run.cfg.identity().resolved();
        std::fs::write(run.out.join("config.resolved"), format!("{}{}", run.header(), resolved))?;
        Ok(run)
    }

    fn header(&self) -> String {
        format!("# config_hash={} seed={}\n", self.hash, self.cfg.seed)
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out.join("artifacts").join(name)
    }

    fn write_text(&self, path: &Path, body: &str) -> Res<()> {
        std::fs::write(path, format!("{}{}", self.header(), body))?;
        Ok(())
    }

    fn write_json(&self, name: &str, mut v: Value) -> Res<()> {
        if let Value::Object(m) = &mut v {
            m.insert("config_hash".into(), json!(self.hash));
            m.insert("seed".into(), json!(self.cfg.seed));
        }
        let text = serde_json::to_string_pretty(&v).expect("json serializes");
        std::fs::write(self.out.join(name), text + "\n")?;
        Ok(())
    }

    fn data(&self) -> Res<Dataset> {
        let d = &self.cfg.data;
        let n = self.cfg.ansatz.n_qubits;
        let ds = match d.source {
            DataSource::Synthetic => synthetic_blobs(d.n_samples, n, self.cfg.seed)?,
            DataSource::Idx => {
                let full = load_idx(
                    d.images.as_deref().expect("validated"),
                    d.labels.as_deref().expect("validated"),
                    (d.keep[0], d.keep[1]),
                    n,
                )?;
                subsample(&full, d.n_samples, self.cfg.seed)
            }
        };
        Ok(ds)
    }

    fn read_circuit(&self, given: Option<&Path>, default: &str) -> Res<Circuit> {
        let p = given.map(Path::to_path_buf).unwrap_or_else(|| self.artifact(default));
        let text = std::fs::read_to_string(&p)
            .map_err(|e| Failure::Input(format!("cannot read circuit {}: {e}", p.display())))?;
        Ok(parse(&text)?)
    }

    fn lut_for(&self, given: Option<&Path>, width: usize) -> Res<Lut> {
        let default = self.artifact("lut.txt");
        match given {
            Some(p) => Ok(Lut::load(p)?),
            None if default.exists() => Ok(Lut::load(&default)?),
            None => Ok(build_lut(&spec_templates(&self.cfg.spec()), &self.cfg.transpile_options(width)?)?),
        }
    }

    fn templates(&self, arg: Option<&str>) -> Res<Vec<Template>> {
        match arg {
            Some(s) => s
                .split(';')
                .map(|t| kinds_from_str(t.trim()).map_err(Failure::from))
                .collect(),
            None => Ok(spec_templates(&self.cfg.spec())),
        }
    }
}

fn file_tag(t: &[qrev::GateKind]) -> String {
    kinds_to_string(t).replace(',', "-")
}

fn cmd_train_qnn(run: &Run) -> Res<()> {
    let spec = run.cfg.spec();
    let (train_ds, eval_ds) = split(&run.data()?, run.cfg.data.eval_fraction, run.cfg.seed)?;
    let t0 = Instant::now();
    let q = train_qnn(&spec, &train_ds, run.cfg.qnn.epochs, run.cfg.qnn.learning_rate, run.cfg.seed)?;
    let secs = t0.elapsed().as_secs_f64();
    run.write_text(&run.artifact("ansatz.txt"), &serialize(&q.ansatz))?;
    run.write_text(&run.artifact("params.txt"), &params_to_text(&q.params))?;
    run.write_text(&run.artifact("victim.txt"), &serialize(&q.bound()?))?;
    let mut log = String::from("epoch,loss,accuracy\n");
    for e in &q.log {
        writeln!(log, "{},{},{}", e.epoch, e.loss, e.accuracy).unwrap();
    }
    run.write_text(&run.artifact("qnn_log.csv"), &log)?;
    let train_acc = qrev::qnn::accuracy(&q.ansatz, &q.params, &train_ds)?;
    let eval_acc = qrev::qnn::accuracy(&q.ansatz, &q.params, &eval_ds)?;
    run.write_json(
        "report.json",
        json!({
            "classifier": spec.label(),
            "n_params": spec.n_params(),
            "train_accuracy": train_acc,
            "eval_accuracy": eval_acc,
        }),
    )?;
    run.write_json("timings.json", json!({ "victim_training_s": secs }))?;
    println!("{}: {} parameters, eval accuracy {:.3}", spec.label(), spec.n_params(), eval_acc);
    Ok(())
}

fn cmd_transpile(run: &Run, circuit: Option<&Path>) -> Res<()> {
    let c = run.read_circuit(circuit, "victim.txt")?;
    let opts = run.cfg.transpile_options(c.n_qubits())?;
    let r = transpile(&c, &opts)?;
    let layout: Vec<String> = r.final_layout.iter().map(|p| p.to_string()).collect();
    let body = format!("# final_layout {}\n{}", layout.join(","), serialize(&r.circuit));
    run.write_text(&run.artifact("transpiled.txt"), &body)?;
    println!("transpiled {} gates into {} basis gates", c.len(), r.circuit.len());
    Ok(())
}

fn cmd_build_lut(run: &Run, templates: Option<&str>) -> Res<()> {
    let ts = run.templates(templates)?;
    let lut = build_lut(&ts, &run.cfg.transpile_options(run.cfg.ansatz.n_qubits)?)?;
    run.write_text(&run.artifact("lut.txt"), &lut.to_text())?;
    println!("{} signatures, {} notes", lut.records.len(), lut.notes.len());
    Ok(())
}

fn cmd_recover_structure(run: &Run, circuit: Option<&Path>, lut: Option<&Path>) -> Res<()> {
    let c = run.read_circuit(circuit, "transpiled.txt")?;
    let lut = run.lut_for(lut, c.n_qubits())?;
    let s = recover_structure(&c, &lut)?;
    run.write_text(&run.artifact("recovered.txt"), &s.serialize())?;
    println!("recovered {} parameter slots over {} segments", s.n_params(), s.matches.len());
    Ok(())
}

fn dataset_for(run: &Run, t: &Template, given: Option<&Path>) -> Res<(ParamDataset, f64)> {
    let cached = run.artifact(&format!("dataset_{}.txt", file_tag(t)));
    let t0 = Instant::now();
    let ds = match given {
        Some(p) => ParamDataset::load(p)?,
        None if cached.exists() => ParamDataset::load(&cached)?,
        None => gen_dataset(t, run.cfg.recovery.grid_step)?,
    };
    if &ds.template != t {
        return Err(Failure::Input(format!(
            "dataset is for template [{}], not [{}]",
            kinds_to_string(&ds.template),
            kinds_to_string(t)
        )));
    }
    Ok((ds, t0.elapsed().as_secs_f64()))
}

fn cmd_gen_dataset(run: &Run, template: Option<&str>) -> Res<()> {
    let mut times = serde_json::Map::new();
    for t in run.templates(template)? {
        let t0 = Instant::now();
        let ds = gen_dataset(&t, run.cfg.recovery.grid_step)?;
        times.insert(kinds_to_string(&t), json!(t0.elapsed().as_secs_f64()));
        run.write_text(&run.artifact(&format!("dataset_{}.txt", file_tag(&t))), &ds.to_text())?;
        println!(
            "[{}]: {} rows, {} duplicate inputs",
            kinds_to_string(&t),
            ds.len(),
            ds.duplicate_inputs
        );
    }
    run.write_json("timings.json", json!({ "dataset_s": times }))
}

fn cmd_train_ae(run: &Run, template: Option<&str>, dataset: Option<&Path>) -> Res<()> {
    let mut times = serde_json::Map::new();
    for t in run.templates(template)? {
        let (ds, ds_s) = dataset_for(run, &t, dataset)?;
        let (model, trace) = train_recovery_model(&ds, &run.cfg.ae)?;
        let tag = file_tag(&t);
        run.write_text(&run.artifact(&format!("model_{tag}.txt")), &model.to_text())?;
        let mut csv = String::from("epoch,train_loss,val_loss,val_mae\n");
        for i in 0..trace.train_loss.len() {
            writeln!(csv, "{},{},{},{}", i + 1, trace.train_loss[i], trace.val_loss[i], trace.val_mae[i]).unwrap();
        }
        run.write_text(&run.artifact(&format!("ae_trace_{tag}.csv")), &csv)?;
        times.insert(
            kinds_to_string(&t),
            json!({ "dataset_s": ds_s, "training_s": model.training_seconds }),
        );
        println!(
            "[{}]: trained on {} rows, val MAE {:.4} → {:.4}",
            kinds_to_string(&t),
            trace.n_train,
            trace.val_mae.first().copied().unwrap_or(f64::NAN),
            trace.val_mae.last().copied().unwrap_or(f64::NAN)
        );
    }
    run.write_json("timings.json", Value::Object(times))
}

fn cmd_recover_params(
    run: &Run,
    method: &str,
    circuit: Option<&Path>,
    lut: Option<&Path>,
    models: Option<&Path>,
) -> Res<()> {
    let method = Method::parse(method)?;
    let c = run.read_circuit(circuit, "transpiled.txt")?;
    let lut = run.lut_for(lut, c.n_qubits())?;
    let s = recover_structure(&c, &lut)?;
    let t0 = Instant::now();
    let (params, extra) = match method {
        Method::Autoencoder => {
            let dir = models.map(Path::to_path_buf).unwrap_or_else(|| run.out.join("artifacts"));
            let mut store = ModelStore::new();
            let needed: BTreeSet<&Template> = s.matches.iter().map(|m| &m.template).collect();
            for t in needed {
                let p = dir.join(format!("model_{}.txt", file_tag(t)));
                if p.exists() {
                    store.insert(t.clone(), RecoveryModel::load(&p)?);
                }
            }
            (recover_params_ae(&s, &store)?, Value::Null)
        }
        Method::BruteForce => {
            let opts = run.cfg.transpile_options(c.n_qubits())?;
            let (p, stats) = recover_params_bf(&s, &opts, run.cfg.recovery.bf_step)?;
            (p, json!({ "candidates_evaluated": stats.candidates_evaluated, "segments": stats.segments }))
        }
    };
    let secs = t0.elapsed().as_secs_f64();
    run.write_text(&run.artifact(&format!("params_{}.txt", method.name())), &params_to_text(&params))?;
    run.write_text(&run.artifact("recovered.txt"), &s.serialize())?;
    run.write_json(
        "report.json",
        json!({ "method": method.name(), "n_params": params.len(), "brute_force": extra }),
    )?;
    run.write_json("timings.json", json!({ "recovery_s": secs }))?;
    println!("recovered {} parameters with {}", params.len(), method.name());
    Ok(())
}

const REPORT_COLUMNS: [&str; 19] = [
    "config_hash",
    "seed",
    "classifier",
    "n_qubits",
    "n_layers",
    "n_params",
    "method",
    "optimization_level",
    "coupling",
    "structure_exact",
    "param_mean_abs_error",
    "param_error_std",
    "accuracy_original",
    "accuracy_recovered",
    "acc_error_pct",
    "acc_after_retraining",
    "diff_acc_pct",
    "candidates_evaluated",
    "n_samples",
];

fn coupling_label(run: &Run) -> Res<String> {
    let o = run.cfg.transpile_options(run.cfg.ansatz.n_qubits)?;
    let edges: Vec<String> = o.coupling.edges().map(|(a, b)| format!("{a}-{b}")).collect();
    Ok(format!("n{}:{}", o.coupling.n_physical(), edges.join(" ")))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Report as JSON with every wall-clock field removed.
fn deterministic_json(r: &RecoveryReport) -> Value {
    let mut v = serde_json::to_value(r).expect("report serializes");
    if let Value::Object(m) = &mut v {
        m.remove("timings");
        if let Some(Value::Object(bf)) = m.get_mut("brute_force") {
            bf.remove("seconds");
            bf.remove("per_segment_seconds");
        }
    }
    v
}

fn cmd_evaluate(run: &Run) -> Res<()> {
    let spec = run.cfg.spec();
    let data = run.data()?;
    let cfg = run.cfg.eval_config();
    let mut store = ModelStore::new();
    let coupling = coupling_label(run)?;
    let mut w = csv::Writer::from_path(run.out.join("report.csv"))?;
    w.write_record(REPORT_COLUMNS)?;
    let mut reports = Vec::new();
    let mut timings = serde_json::Map::new();
    for method in run.cfg.methods()? {
        let ev = evaluate(&spec, &data, method, &cfg, &mut store)?;
        let r = &ev.report;
        w.write_record([
            run.hash.clone(),
            run.cfg.seed.to_string(),
            r.classifier.clone(),
            r.n_qubits.to_string(),
            r.n_layers.to_string(),
            r.n_params.to_string(),
            method.name().to_string(),
            r.optimization_level.to_string(),
            coupling.clone(),
            r.structure_exact.to_string(),
            opt(r.param_mean_abs_error),
            opt(r.param_error_std),
            r.accuracy_original.to_string(),
            r.accuracy_recovered.to_string(),
            r.acc_error_pct.to_string(),
            r.acc_after_retraining.to_string(),
            r.diff_acc_pct.to_string(),
            r.brute_force.as_ref().map(|b| b.candidates_evaluated.to_string()).unwrap_or_default(),
            data.len().to_string(),
        ])?;
        let name = method.name();
        if reports.is_empty() {
            run.write_text(&run.artifact("params.txt"), &params_to_text(&ev.victim.params))?;
            run.write_text(&run.artifact("victim.txt"), &serialize(&ev.victim.bound()?))?;
            run.write_text(&run.artifact("transpiled.txt"), &serialize(&ev.transpiled))?;
        }
        run.write_text(&run.artifact(&format!("recovered_{name}.txt")), &ev.structure.serialize())?;
        run.write_text(
            &run.artifact(&format!("params_{name}.txt")),
            &params_to_text(&ev.recovered_params),
        )?;
        timings.insert(name.into(), serde_json::to_value(&r.timings).expect("serializes"));
        println!(
            "{} {}: {} params, error {} rad, accuracy {:.3} → {:.3} (retrained {:.3})",
            r.classifier,
            name,
            r.n_params,
            r.param_mean_abs_error.map(|e| format!("{e:.3}")).unwrap_or_else(|| "n/a".into()),
            r.accuracy_original,
            r.accuracy_recovered,
            r.acc_after_retraining
        );
        reports.push(deterministic_json(r));
    }
    w.flush()?;
    for (t, m) in &store {
        run.write_text(&run.artifact(&format!("model_{}.txt", file_tag(t))), &m.to_text())?;
    }
    run.write_json("report.json", json!({ "reports": reports }))?;
    run.write_json("timings.json", Value::Object(timings))
}

fn cmd_bench(run: &Run) -> Res<()> {
    let spec = run.cfg.spec();
    let data = run.data()?;
    let grid = run.cfg.countermeasure_grid();
    let methods = run.cfg.methods()?;
    let mut store = ModelStore::new();
    let rows = bench_countermeasures(&spec, &grid, &methods, &data, &run.cfg.eval_config(), &mut store)?;
    let coupling = coupling_label(run)?;
    let mut w = csv::Writer::from_path(run.out.join("report.csv"))?;
    w.write_record([
        "config_hash",
        "seed",
        "classifier",
        "optimization_level",
        "coupling",
        "dummy_qubits",
        "extra_layers",
        "method",
        "transpiled_gates",
        "n_params_recovered",
        "accuracy_original",
        "accuracy_recovered",
        "acc_error_pct",
        "candidates_evaluated",
    ])?;
    for r in &rows {
        w.write_record([
            run.hash.clone(),
            run.cfg.seed.to_string(),
            r.classifier.clone(),
            run.cfg.transpile.optimization_level.to_string(),
            coupling.clone(),
            r.dummy_qubits.to_string(),
            r.extra_layers.to_string(),
            r.method.name().into(),
            r.transpiled_gates.to_string(),
            r.n_params_recovered.to_string(),
            r.accuracy_original.to_string(),
            r.accuracy_recovered.to_string(),
            r.acc_error_pct.to_string(),
            r.candidates_evaluated.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let strip = |r: &BenchRow| {
        let mut v = serde_json::to_value(r).expect("serializes");
        if let Value::Object(m) = &mut v {
            for k in ["dataset_s", "training_s", "recovery_s", "total_s"] {
                m.remove(k);
            }
        }
        v
    };
    run.write_json("report.json", json!({ "rows": rows.iter().map(strip).collect::<Vec<_>>() }))?;
    let times: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "dummy_qubits": r.dummy_qubits,
                "extra_layers": r.extra_layers,
                "method": r.method.name(),
                "dataset_s": r.dataset_s,
                "training_s": r.training_s,
                "recovery_s": r.recovery_s,
                "total_s": r.total_s,
            })
        })
        .collect();
    run.write_json("timings.json", json!({ "rows": times }))?;

    println!("{:>3} {:>3} {:<12} {:>6} {:>7} {:>10} {:>8}", "d", "e", "method", "gates", "params", "time [s]", "acc err");
    for r in &rows {
        println!(
            "{:>3} {:>3} {:<12} {:>6} {:>7} {:>10.3} {:>7.1}%",
            r.dummy_qubits,
            r.extra_layers,
            r.method.name(),
            r.transpiled_gates,
            r.n_params_recovered,
            r.total_s,
            r.acc_error_pct
        );
    }
    Ok(())
}

fn cmd_report(out: &Path, inputs: &[PathBuf]) -> Res<()> {
    let mut header: Option<csv::StringRecord> = None;
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for input in inputs {
        let file = if input.is_dir() { input.join("report.csv") } else { input.clone() };
        let mut r = csv::Reader::from_path(&file)
            .map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
        let h = r.headers()?.clone();
        match &header {
            None => header = Some(h),
            Some(prev) if *prev != h => {
                return Err(Failure::Input(format!("{} has different columns", file.display())))
            }
            _ => {}
        }
        for rec in r.records() {
            rows.push(rec?);
        }
    }
    let header = header.expect("at least one input");
    let col = |name: &str| header.iter().position(|h| h == name);
    if let (Some(lvl), Some(cpl)) = (col("optimization_level"), col("coupling")) {
        let opts: BTreeSet<(String, String)> = rows
            .iter()
            .map(|r| (r[lvl].to_string(), r[cpl].to_string()))
            .collect();
        if opts.len() > 1 {
            return Err(Failure::Input(format!(
                "refusing to merge rows with conflicting transpile options: {opts:?}"
            )));
        }
    }
    std::fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("report.csv"))?;
    w.write_record(&header)?;
    for r in &rows {
        w.write_record(r)?;
    }
    w.flush()?;
    println!("merged {} rows from {} inputs", rows.len(), inputs.len());
    Ok(())
}

fn dispatch(cmd: Command) -> Res<()> {
    match cmd {
        Command::TrainQnn(c) => cmd_train_qnn(&Run::start(&c)?),
        Command::Transpile { common, circuit } => cmd_transpile(&Run::start(&common)?, circuit.as_deref()),
        Command::BuildLut { common, templates } => cmd_build_lut(&Run::start(&common)?, templates.as_deref()),
        Command::RecoverStructure { common, circuit, lut } => {
            cmd_recover_structure(&Run::start(&common)?, circuit.as_deref(), lut.as_deref())
        }
        Command::GenAeDataset { common, template } => cmd_gen_dataset(&Run::start(&common)?, template.as_deref()),
        Command::TrainAe {
            common,
            template,
            dataset,
        } => cmd_train_ae(&Run::start(&common)?, template.as_deref(), dataset.as_deref()),
        Command::RecoverParams {
            common,
            method,
            circuit,
            lut,
            models,
        } => cmd_recover_params(
            &Run::start(&common)?,
            &method,
            circuit.as_deref(),
            lut.as_deref(),
            models.as_deref(),
        ),
        Command::Evaluate(c) => cmd_evaluate(&Run::start(&c)?),
        Command::BenchCountermeasures(c) => cmd_bench(&Run::start(&c)?),
        Command::Report { out, inputs } => cmd_report(&out, &inputs),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
