use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;

use super::branch::{canonicalize, symmetries, Flip};
use super::dataset::ParamDataset;
use crate::circuit::wrap_angle;
use crate::error::{Error, Result};
use crate::neural::{build_autoencoder, load_checkpoint, save_checkpoint, train, Mlp, TrainConfig, TrainTrace};
use crate::structlut::{kinds_from_str, kinds_to_string, validate_template, RecoveredStructure, Template};

/// Autoencoder mapping a canonical RZ triple back to one template's angles.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryModel {
    pub template: Template,
    pub mlp: Mlp,
    symmetries: Vec<Vec<Flip>>,
    /// Wall time of dataset generation and training, if built here.
    pub dataset_seconds: f64,
    pub training_seconds: f64,
}

pub type ModelStore = BTreeMap<Template, RecoveryModel>;

impl RecoveryModel {
    pub fn new(template: Template, mlp: Mlp) -> Result<RecoveryModel> {
        validate_template(&template)?;
        if mlp.input_dim() != 3 || mlp.output_dim() != template.len() {
            return Err(Error::Dimension {
                expected: template.len(),
                got: mlp.output_dim(),
            });
        }
        Ok(RecoveryModel {
            symmetries: symmetries(&template),
            template,
            mlp,
            dataset_seconds: 0.0,
            training_seconds: 0.0,
        })
    }

    /// Wrapped predictions for every row of `x` (n × 3).
    pub fn predict(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(self.mlp.infer(x.view())?.mapv(wrap_angle))
    }

    pub fn canonical_target(&self, angles: &[f64]) -> Vec<f64> {
        canonicalize(angles, &self.symmetries)
    }

    pub fn to_text(&self) -> String {
        format!("# template {}\n{}", kinds_to_string(&self.template), save_checkpoint(&self.mlp))
    }

    pub fn from_text(text: &str) -> Result<RecoveryModel> {
        let first = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(|l| l.strip_prefix("# template "))
            .ok_or_else(|| Error::Format("recovery model lacks a leading `# template` line".into()))?;
        RecoveryModel::new(kinds_from_str(first.trim())?, load_checkpoint(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<RecoveryModel> {
        RecoveryModel::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Train the autoencoder on `ds`; targets are canonicalized per orbit.
pub fn train_recovery_model(ds: &ParamDataset, cfg: &TrainConfig) -> Result<(RecoveryModel, TrainTrace)> {
    if ds.is_empty() {
        return Err(Error::Precondition("empty recovery dataset".into()));
    }
    let mlp = build_autoencoder(3, ds.k(), cfg.seed)?;
    let mut model = RecoveryModel::new(ds.template.clone(), mlp)?;
    let mut y = ds.y.clone();
    for mut row in y.rows_mut() {
        let c = model.canonical_target(row.as_slice().expect("contiguous"));
        row.assign(&ndarray::ArrayView1::from(&c));
    }
    let t0 = std::time::Instant::now();
    let trace = train(&mut model.mlp, ds.x.view(), y.view(), cfg)?;
    model.training_seconds = t0.elapsed().as_secs_f64();
    Ok((model, trace))
}

/// Run each matched segment's canonical triple through its template's model
/// and place the outputs at the segment's tags.
pub fn recover_params_ae(structure: &RecoveredStructure, models: &ModelStore) -> Result<Vec<f64>> {
    let mut out = vec![0.0; structure.n_params()];
    let mut by_template: BTreeMap<&Template, Vec<usize>> = BTreeMap::new();
    for (i, m) in structure.matches.iter().enumerate() {
        by_template.entry(&m.template).or_default().push(i);
    }
    for (template, idx) in by_template {
        let model = models
            .get(template)
            .ok_or_else(|| Error::MissingModel(kinds_to_string(template)))?;
        let mut x = Array2::zeros((idx.len(), 3));
        for (r, &i) in idx.iter().enumerate() {
            let t = structure.matches[i].canonical_triple()?;
            for j in 0..3 {
                x[[r, j]] = t[j];
            }
        }
        let y = model.predict(&x)?;
        for (r, &i) in idx.iter().enumerate() {
            for (j, &tag) in structure.matches[i].tags.iter().enumerate() {
                out[tag] = y[[r, j]];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind::*;
    use crate::recovery::dataset::gen_dataset;

    #[test]
    fn small_model_learns_rz() {
        let ds = gen_dataset(&[Rz], 0.1).unwrap();
        let cfg = TrainConfig {
            epochs: 30,
            batch_size: 16,
            seed: 3,
            ..Default::default()
        };
        let (m, trace) = train_recovery_model(&ds, &cfg).unwrap();
        assert!(trace.val_mae.last().unwrap() < &trace.val_mae[0]);
        let back = RecoveryModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back.mlp, m.mlp);
        assert_eq!(back.predict(&ds.x).unwrap(), m.predict(&ds.x).unwrap());
    }

    #[test]
    fn missing_model_is_reported() {
        use crate::structlut::{build_lut, recover_structure};
        use crate::transpiler::{transpile, TranspileOptions};
        let opts = TranspileOptions::linear(1, 0);
        let lut = build_lut(&[vec![Ry]], &opts).unwrap();
        let victim = super::super::dataset::template_circuit(&[Ry], &[0.4]).unwrap();
        let s = recover_structure(&transpile(&victim, &opts).unwrap().circuit, &lut).unwrap();
        assert!(matches!(recover_params_ae(&s, &ModelStore::new()), Err(Error::MissingModel(_))));
    }
}
