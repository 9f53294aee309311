use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Layer, Mlp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub validation_fraction: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Seeds the validation split, shuffling and dropout masks.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 1024,
            validation_fraction: 0.2,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Precondition(format!(
                "validation_fraction must be in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Precondition("batch_size must be positive".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Precondition("learning rate must be finite and ≥ 0".into()));
        }
        Ok(())
    }

    /// `(n_train, n_val)` for `n` samples; both sides keep at least one row.
    pub fn split_sizes(&self, n: usize) -> (usize, usize) {
        let val = ((n as f64 * self.validation_fraction).round() as usize).clamp(1, n - 1);
        (n - val, val)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainTrace {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub val_mae: Vec<f64>,
    pub n_train: usize,
    pub n_val: usize,
}

/// Mean of squared errors over every output entry.
pub fn mse(pred: &Array2<f64>, target: &ArrayView2<f64>) -> f64 {
    let diff = pred - target;
    diff.mapv(|v| v * v).mean().unwrap_or(0.0)
}

fn mae(pred: &Array2<f64>, target: &ArrayView2<f64>) -> f64 {
    (pred - target).mapv(f64::abs).mean().unwrap_or(0.0)
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(model: &Mlp) -> Adam {
        let shapes: Vec<Vec<f64>> = model.param_slices().iter().map(|s| vec![0.0; s.len()]).collect();
        Adam {
            v: shapes.clone(),
            m: shapes,
            t: 0,
        }
    }

    fn step(&mut self, model: &mut Mlp, grads: &[Vec<f64>], cfg: &TrainConfig) {
        self.t += 1;
        let lr_t = cfg.learning_rate * (1.0 - cfg.beta2.powi(self.t)).sqrt()
            / (1.0 - cfg.beta1.powi(self.t));
        for (((p, g), m), v) in model
            .param_slices_mut()
            .into_iter()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for i in 0..p.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                p[i] -= lr_t * m[i] / (v[i].sqrt() + cfg.epsilon);
            }
        }
    }
}

/// Adam on MSE with a held-out validation split (seeded permutation) and
/// per-epoch shuffled mini-batches. The model keeps the final weights.
pub fn train(model: &mut Mlp, x: ArrayView2<f64>, y: ArrayView2<f64>, cfg: &TrainConfig) -> Result<TrainTrace> {
    cfg.validate()?;
    let n = x.nrows();
    if n < 2 {
        return Err(Error::Precondition(format!("need at least 2 samples, got {n}")));
    }
    if y.nrows() != n {
        return Err(Error::Dimension {
            expected: n,
            got: y.nrows(),
        });
    }
    if x.ncols() != model.input_dim() {
        return Err(Error::Dimension {
            expected: model.input_dim(),
            got: x.ncols(),
        });
    }
    if y.ncols() != model.output_dim() {
        return Err(Error::Dimension {
            expected: model.output_dim(),
            got: y.ncols(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let (n_train, n_val) = cfg.split_sizes(n);
    let (train_idx, val_idx) = order.split_at(n_train);
    let x_val = x.select(Axis(0), val_idx);
    let y_val = y.select(Axis(0), val_idx);
    let mut train_idx = train_idx.to_vec();

    let mut adam = Adam::new(model);
    let mut trace = TrainTrace {
        n_train,
        n_val,
        ..Default::default()
    };
    let out_dim = y.ncols() as f64;
    for epoch in 1..=cfg.epochs {
        train_idx.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in train_idx.chunks(cfg.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb = y.select(Axis(0), batch);
            let (pred, caches) = model.forward_train(xb.view(), &mut rng, true)?;
            let loss = mse(&pred, &yb.view());
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            loss_sum += loss * batch.len() as f64;
            let scale = 2.0 / (batch.len() as f64 * out_dim);
            let dout = (pred - &yb) * scale;
            let grads = model.backward(caches, dout);
            adam.step(model, &grads, cfg);
        }
        let pred_val = model.infer(x_val.view())?;
        let vl = mse(&pred_val, &y_val.view());
        if !vl.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        trace.train_loss.push(loss_sum / n_train as f64);
        trace.val_loss.push(vl);
        trace.val_mae.push(mae(&pred_val, &y_val.view()));
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Max relative error per trainable array (kernel, bias, gamma, beta…).
    pub per_array: Vec<f64>,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

/// Compare backprop gradients of the MSE loss against central differences.
/// Batch norm runs on batch statistics; dropout must be disabled.
pub fn grad_check(model: &Mlp, x: ArrayView2<f64>, y: ArrayView2<f64>, eps: f64) -> Result<GradCheckReport> {
    if model.layers.iter().any(|l| matches!(l, Layer::Dropout { rate } if *rate > 0.0)) {
        return Err(Error::Precondition("gradient check requires dropout disabled".into()));
    }
    let n_params = model.trainable_params();
    if n_params >= 5000 {
        return Err(Error::Precondition(format!(
            "gradient check is limited to < 5000 parameters, model has {n_params}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut work = model.clone();
    let loss_at = |m: &mut Mlp, rng: &mut ChaCha8Rng| -> Result<f64> {
        let (pred, _) = m.forward_train(x, rng, false)?;
        Ok(mse(&pred, &y))
    };

    let (pred, caches) = work.forward_train(x, &mut rng, false)?;
    let scale = 2.0 / (x.nrows() as f64 * y.ncols() as f64);
    let grads = work.backward(caches, (pred - y) * scale);
    let analytic: Vec<f64> = grads.concat();

    let base = work.params_flat();
    let mut numeric = Vec::with_capacity(base.len());
    let mut p = base.clone();
    for i in 0..base.len() {
        p[i] = base[i] + eps;
        work.set_params_flat(&p)?;
        let up = loss_at(&mut work, &mut rng)?;
        p[i] = base[i] - eps;
        work.set_params_flat(&p)?;
        let down = loss_at(&mut work, &mut rng)?;
        p[i] = base[i];
        numeric.push((up - down) / (2.0 * eps));
    }

    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-7);
    let mut per_array = Vec::new();
    let mut off = 0;
    for g in &grads {
        let worst = (off..off + g.len())
            .map(|i| rel(analytic[i], numeric[i]))
            .fold(0.0, f64::max);
        per_array.push(worst);
        off += g.len();
    }
    Ok(GradCheckReport {
        max_rel_error: per_array.iter().copied().fold(0.0, f64::max),
        per_array,
        analytic,
        numeric,
    })
}
