//! Run configuration: one TOML document, overridable by `--set a.b=v`.

use std::fmt;
use std::path::{Path, PathBuf};

use qrev::neural::TrainConfig;
use qrev::qnn::{AnsatzSpec, Entangle};
use qrev::recovery::{Countermeasure, EvalConfig, Method};
use qrev::structlut::kinds_from_str;
use qrev::transpiler::{CouplingMap, TranspileOptions, DEFAULT_ZERO_TOL};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzSection {
    pub n_qubits: usize,
    pub n_layers: usize,
    /// Comma-separated kinds, e.g. `"rx,ry,rz"`.
    pub rotations: String,
    pub entangle: Entangle,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        AnsatzSection {
            n_qubits: 2,
            n_layers: 1,
            rotations: "rx,ry,rz".into(),
            entangle: Entangle::LinearChain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TranspileSection {
    pub optimization_level: u8,
    pub zero_tol: f64,
    /// Explicit coupling edges; empty means a linear map sized to the circuit.
    pub edges: Vec<[usize; 2]>,
    pub n_physical: Option<usize>,
}

impl Default for TranspileSection {
    fn default() -> Self {
        TranspileSection {
            optimization_level: 1,
            zero_tol: DEFAULT_ZERO_TOL,
            edges: Vec::new(),
            n_physical: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic,
    Idx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub source: DataSource,
    pub n_samples: usize,
    pub images: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// The two digit classes kept, mapped to labels 0 and 1.
    pub keep: [u8; 2],
    pub eval_fraction: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            source: DataSource::Synthetic,
            n_samples: 120,
            images: None,
            labels: None,
            keep: [0, 1],
            eval_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QnnSection {
    pub epochs: usize,
    pub learning_rate: f64,
    pub retrain_epochs: usize,
    pub retrain_learning_rate: f64,
}

impl Default for QnnSection {
    fn default() -> Self {
        QnnSection {
            epochs: 30,
            learning_rate: 0.05,
            retrain_epochs: 30,
            retrain_learning_rate: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverySection {
    pub methods: Vec<String>,
    pub grid_step: f64,
    pub bf_step: f64,
}

impl Default for RecoverySection {
    fn default() -> Self {
        RecoverySection {
            methods: vec!["ae".into()],
            grid_step: 0.1,
            bf_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountermeasureSection {
    pub dummy_qubits: Vec<usize>,
    pub extra_layers: Vec<usize>,
}

impl Default for CountermeasureSection {
    fn default() -> Self {
        CountermeasureSection {
            dummy_qubits: vec![0, 1, 2],
            extra_layers: vec![0, 1, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub transpile: TranspileSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub qnn: QnnSection,
    #[serde(default)]
    pub ae: TrainConfig,
    #[serde(default)]
    pub recovery: RecoverySection,
    #[serde(default)]
    pub countermeasures: CountermeasureSection,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Set `path` (dotted) in `doc` to `raw`, parsed as a TOML value when
/// possible and as a string otherwise.
pub fn apply_override(doc: &mut toml::Table, path: &str, raw: &str) -> Result<(), ConfigError> {
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(err(path, "empty key in override path"));
    }
    let mut table = doc;
    for k in &keys[..keys.len() - 1] {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| err(path, format!("`{k}` is not a table")))?;
    }
    table.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
        let mut doc = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| err("", format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| err("", format!("{}: {}", p.display(), e.message())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| err(o, "override must look like `path=value`"))?;
            apply_override(&mut doc, k.trim(), v.trim())?;
        }
        let cfg: RunConfig = toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| {
            let msg = e.message().to_string();
            let path = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field"))
                .unwrap_or("")
                .to_string();
            err(&path, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let a = &self.ansatz;
        if a.n_qubits == 0 || a.n_qubits > 10 {
            return Err(err("ansatz.n_qubits", "must be in 1..=10"));
        }
        if a.n_layers == 0 {
            return Err(err("ansatz.n_layers", "must be ≥ 1"));
        }
        let rots = kinds_from_str(&a.rotations).map_err(|e| err("ansatz.rotations", e.to_string()))?;
        if rots.is_empty() || rots.iter().any(|k| !k.is_rotation()) {
            return Err(err("ansatz.rotations", "must list rx/ry/rz gates"));
        }
        if self.transpile.optimization_level > 1 {
            return Err(err("transpile.optimization_level", "only levels 0 and 1 are supported"));
        }
        self.transpile_options(a.n_qubits)
            .and_then(|o| o.validate().map_err(|e| err("transpile", e.to_string())))?;
        let d = &self.data;
        if d.n_samples < 2 {
            return Err(err("data.n_samples", "need at least 2 samples"));
        }
        if !(d.eval_fraction > 0.0 && d.eval_fraction < 1.0) {
            return Err(err("data.eval_fraction", "must be in (0, 1)"));
        }
        if d.source == DataSource::Idx {
            for (name, p) in [("data.images", &d.images), ("data.labels", &d.labels)] {
                match p {
                    None => return Err(err(name, "required when data.source = \"idx\"")),
                    Some(p) if !p.exists() => {
                        return Err(err(name, format!("{} does not exist", p.display())))
                    }
                    _ => {}
                }
            }
        }
        self.ae.validate().map_err(|e| err("ae", e.to_string()))?;
        if self.recovery.methods.is_empty() {
            return Err(err("recovery.methods", "list at least one method"));
        }
        self.methods()?;
        for (name, v) in [
            ("recovery.grid_step", self.recovery.grid_step),
            ("recovery.bf_step", self.recovery.bf_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(err(name, "must be positive"));
            }
        }
        for (name, v) in [
            ("qnn.learning_rate", self.qnn.learning_rate),
            ("qnn.retrain_learning_rate", self.qnn.retrain_learning_rate),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(err(name, "must be finite and ≥ 0"));
            }
        }
        for cm in self.countermeasure_grid() {
            cm.validate().map_err(|e| err("countermeasures", e.to_string()))?;
        }
        Ok(())
    }

    pub fn methods(&self) -> Result<Vec<Method>, ConfigError> {
        self.recovery
            .methods
            .iter()
            .map(|m| Method::parse(m).map_err(|e| err("recovery.methods", e.to_string())))
            .collect()
    }

    pub fn spec(&self) -> AnsatzSpec {
        let mut s = AnsatzSpec::new(
            self.ansatz.n_qubits,
            self.ansatz.n_layers,
            kinds_from_str(&self.ansatz.rotations).expect("validated"),
        );
        s.entangle = self.ansatz.entangle;
        s
    }

    pub fn transpile_options(&self, width: usize) -> Result<TranspileOptions, ConfigError> {
        let t = &self.transpile;
        let coupling = if t.edges.is_empty() {
            CouplingMap::linear(t.n_physical.unwrap_or(width))
        } else {
            let edges: Vec<(usize, usize)> = t.edges.iter().map(|e| (e[0], e[1])).collect();
            let n = t
                .n_physical
                .unwrap_or_else(|| edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(width));
            CouplingMap::from_edges(n, &edges).map_err(|e| err("transpile.edges", e.to_string()))?
        };
        Ok(TranspileOptions {
            optimization_level: t.optimization_level,
            coupling,
            zero_tol: t.zero_tol,
        })
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            seed: self.seed,
            eval_fraction: self.data.eval_fraction,
            qnn_epochs: self.qnn.epochs,
            qnn_lr: self.qnn.learning_rate,
            retrain_epochs: self.qnn.retrain_epochs,
            retrain_lr: self.qnn.retrain_learning_rate,
            transpile: self.transpile_options(self.ansatz.n_qubits).expect("validated"),
            grid_step: self.recovery.grid_step,
            bf_step: self.recovery.bf_step,
            ae: self.ae.clone(),
        }
    }

    pub fn countermeasure_grid(&self) -> Vec<Countermeasure> {
        let c = &self.countermeasures;
        let mut out = Vec::new();
        for &d in &c.dummy_qubits {
            for &e in &c.extra_layers {
                out.push(Countermeasure {
                    dummy_qubits: d,
                    extra_layers: e,
                });
            }
        }
        out
    }

    /// Canonical TOML of the resolved configuration.
    pub fn resolved(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The config with output location and worker count cleared; these do
    /// not affect results.
    pub fn identity(&self) -> RunConfig {
        RunConfig {
            output_dir: PathBuf::new(),
            workers: 0,
            ..self.clone()
        }
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.identity().resolved().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_paths() {
        let cfg = RunConfig::load(None, &["seed=3".into(), "ansatz.n_layers=2".into(), "ansatz.rotations=ry,rz".into()]).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.ansatz.n_layers, 2);
        assert_eq!(cfg.spec().n_params(), 8);

        let e = RunConfig::load(None, &["seed=1".into(), "ansatz.n_qubits=0".into()]).unwrap_err();
        assert_eq!(e.path, "ansatz.n_qubits");
        let e = RunConfig::load(None, &["seed=1".into(), "ansatz.bogus=1".into()]).unwrap_err();
        assert_eq!(e.path, "bogus");
        assert!(RunConfig::load(None, &[]).is_err(), "seed is mandatory");
    }

    #[test]
    fn hash_is_stable() {
        let a = RunConfig::load(None, &["seed=1".into()]).unwrap();
        let b = RunConfig::load(None, &["seed=1".into()]).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::load(None, &["seed=2".into()]).unwrap();
        assert_ne!(a.hash(), c.hash());
        let back: RunConfig = toml::from_str(&a.resolved()).unwrap();
        assert_eq!(back, a);
    }
}
