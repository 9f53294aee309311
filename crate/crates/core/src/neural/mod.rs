//! Small dense-network engine: dense, batch-norm and dropout layers, trained
//! with Adam on mean squared error.
//!
//! Batches are row-major `(batch, features)` matrices. Dense kernels are
//! stored `(in, out)` so a layer computes `x·W + b`.

mod checkpoint;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use train::{grad_check, mse, train, GradCheckReport, TrainConfig, TrainTrace};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const BN_EPSILON: f64 = 1e-3;
pub const BN_MOMENTUM: f64 = 0.99;
const INFER_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    None,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Dense { width: usize, activation: Activation },
    BatchNorm,
    Dropout { rate: f64 },
}

impl LayerSpec {
    pub fn dense(width: usize, activation: Activation) -> Self {
        LayerSpec::Dense { width, activation }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::BatchNorm => "batchnorm",
            LayerSpec::Dropout { .. } => "dropout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Layer {
    Dense {
        w: Array2<f64>,
        b: Array1<f64>,
        activation: Activation,
    },
    BatchNorm {
        gamma: Array1<f64>,
        beta: Array1<f64>,
        mean: Array1<f64>,
        var: Array1<f64>,
    },
    Dropout {
        rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    input_dim: usize,
    specs: Vec<LayerSpec>,
    pub(crate) layers: Vec<Layer>,
    seed: u64,
}

/// Per-layer values saved by a training-mode forward pass.
pub(crate) enum Cache {
    Dense { x: Array2<f64>, z: Array2<f64> },
    BatchNorm { xhat: Array2<f64>, inv_std: Array1<f64> },
    Dropout { mask: Option<Array2<f64>> },
}

impl Mlp {
    /// Build and initialize: He-uniform kernels for relu layers,
    /// Glorot-uniform otherwise, zero biases, identity batch norm.
    pub fn new(input_dim: usize, specs: Vec<LayerSpec>, seed: u64) -> Result<Mlp> {
        if input_dim == 0 {
            return Err(Error::Precondition("input width must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut width = input_dim;
        let mut layers = Vec::with_capacity(specs.len());
        for s in &specs {
            layers.push(match *s {
                LayerSpec::Dense { width: out, activation } => {
                    if out == 0 {
                        return Err(Error::Precondition("dense width must be positive".into()));
                    }
                    let limit = match activation {
                        Activation::Relu => (6.0 / width as f64).sqrt(),
                        Activation::None => (6.0 / (width + out) as f64).sqrt(),
                    };
                    let w = Array2::from_shape_fn((width, out), |_| rng.random_range(-limit..limit));
                    width = out;
                    Layer::Dense {
                        w,
                        b: Array1::zeros(out),
                        activation,
                    }
                }
                LayerSpec::BatchNorm => Layer::BatchNorm {
                    gamma: Array1::ones(width),
                    beta: Array1::zeros(width),
                    mean: Array1::zeros(width),
                    var: Array1::ones(width),
                },
                LayerSpec::Dropout { rate } => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(Error::Precondition(format!("dropout rate {rate} not in [0, 1)")));
                    }
                    Layer::Dropout { rate }
                }
            });
        }
        Ok(Mlp {
            input_dim,
            specs,
            layers,
            seed,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers
            .iter()
            .rev()
            .find_map(|l| match l {
                Layer::Dense { b, .. } => Some(b.len()),
                _ => None,
            })
            .unwrap_or(self.input_dim)
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Per-layer parameter counts; batch norm counts its running statistics
    /// too (4 per unit), dropout has none.
    pub fn param_counts(&self) -> Vec<usize> {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Dense { w, b, .. } => w.len() + b.len(),
                Layer::BatchNorm { gamma, .. } => 4 * gamma.len(),
                Layer::Dropout { .. } => 0,
            })
            .collect()
    }

    pub fn total_params(&self) -> usize {
        self.param_counts().iter().sum()
    }

    pub fn trainable_params(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    /// Trainable arrays in a fixed order: kernel, bias per dense layer;
    /// gamma, beta per batch norm.
    pub(crate) fn param_slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for l in &self.layers {
            match l {
                Layer::Dense { w, b, .. } => {
                    out.push(w.as_slice().expect("standard layout"));
                    out.push(b.as_slice().expect("standard layout"));
                }
                Layer::BatchNorm { gamma, beta, .. } => {
                    out.push(gamma.as_slice().expect("standard layout"));
                    out.push(beta.as_slice().expect("standard layout"));
                }
                Layer::Dropout { .. } => {}
            }
        }
        out
    }

    pub(crate) fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            match l {
                Layer::Dense { w, b, .. } => {
                    out.push(w.as_slice_mut().expect("standard layout"));
                    out.push(b.as_slice_mut().expect("standard layout"));
                }
                Layer::BatchNorm { gamma, beta, .. } => {
                    out.push(gamma.as_slice_mut().expect("standard layout"));
                    out.push(beta.as_slice_mut().expect("standard layout"));
                }
                Layer::Dropout { .. } => {}
            }
        }
        out
    }

    /// All trainable values concatenated in `param_slices` order.
    pub fn params_flat(&self) -> Vec<f64> {
        self.param_slices().concat()
    }

    pub fn set_params_flat(&mut self, values: &[f64]) -> Result<()> {
        let want = self.trainable_params();
        if values.len() != want {
            return Err(Error::Dimension {
                expected: want,
                got: values.len(),
            });
        }
        let mut off = 0;
        for s in self.param_slices_mut() {
            s.copy_from_slice(&values[off..off + s.len()]);
            off += s.len();
        }
        Ok(())
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim {
            return Err(Error::Dimension {
                expected: self.input_dim,
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// Forward pass. Training mode samples dropout masks from `rng` and
    /// normalizes with batch statistics, updating the running ones.
    pub fn forward(&mut self, x: ArrayView2<f64>, mode: Mode, rng: &mut impl Rng) -> Result<Array2<f64>> {
        match mode {
            Mode::Infer => self.infer(x),
            Mode::Train => Ok(self.forward_train(x, rng, true)?.0),
        }
    }

    /// Deterministic inference, evaluated in fixed-size chunks.
    pub fn infer(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut out = Array2::zeros((x.nrows(), self.output_dim()));
        for (i, chunk) in x.axis_chunks_iter(Axis(0), INFER_CHUNK).enumerate() {
            let y = self.infer_chunk(chunk);
            let start = i * INFER_CHUNK;
            out.slice_mut(ndarray::s![start..start + y.nrows(), ..]).assign(&y);
        }
        Ok(out)
    }

    fn infer_chunk(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut h = x.to_owned();
        for l in &self.layers {
            match l {
                Layer::Dense { w, b, activation } => {
                    h = h.dot(w) + b;
                    if *activation == Activation::Relu {
                        h.mapv_inplace(|v| v.max(0.0));
                    }
                }
                Layer::BatchNorm {
                    gamma,
                    beta,
                    mean,
                    var,
                } => {
                    let scale = gamma / &var.mapv(|v| (v + BN_EPSILON).sqrt());
                    let shift = beta - &(mean * &scale);
                    h = h * &scale + &shift;
                }
                Layer::Dropout { .. } => {}
            }
        }
        h
    }

    pub(crate) fn forward_train(
        &mut self,
        x: ArrayView2<f64>,
        rng: &mut impl Rng,
        update_stats: bool,
    ) -> Result<(Array2<f64>, Vec<Cache>)> {
        self.check_input(&x)?;
        let n = x.nrows() as f64;
        let mut h = x.to_owned();
        let mut caches = Vec::with_capacity(self.layers.len());
        for l in &mut self.layers {
            match l {
                Layer::Dense { w, b, activation } => {
                    let z = h.dot(&*w) + &*b;
                    let a = match activation {
                        Activation::Relu => z.mapv(|v| v.max(0.0)),
                        Activation::None => z.clone(),
                    };
                    caches.push(Cache::Dense { x: h, z });
                    h = a;
                }
                Layer::BatchNorm {
                    gamma,
                    beta,
                    mean,
                    var,
                } => {
                    let mu = h.mean_axis(Axis(0)).expect("nonempty batch");
                    let centered = &h - &mu;
                    let bvar = centered.mapv(|v| v * v).sum_axis(Axis(0)) / n;
                    let inv_std = bvar.mapv(|v| 1.0 / (v + BN_EPSILON).sqrt());
                    let xhat = centered * &inv_std;
                    h = &xhat * &*gamma + &*beta;
                    if update_stats {
                        mean.zip_mut_with(&mu, |m, &b| *m = BN_MOMENTUM * *m + (1.0 - BN_MOMENTUM) * b);
                        var.zip_mut_with(&bvar, |m, &b| *m = BN_MOMENTUM * *m + (1.0 - BN_MOMENTUM) * b);
                    }
                    caches.push(Cache::BatchNorm { xhat, inv_std });
                }
                Layer::Dropout { rate } => {
                    if *rate > 0.0 {
                        let keep = 1.0 / (1.0 - *rate);
                        let r = *rate;
                        let mask = Array2::from_shape_simple_fn(h.raw_dim(), || {
                            if rng.random::<f64>() < r {
                                0.0
                            } else {
                                keep
                            }
                        });
                        h *= &mask;
                        caches.push(Cache::Dropout { mask: Some(mask) });
                    } else {
                        caches.push(Cache::Dropout { mask: None });
                    }
                }
            }
        }
        Ok((h, caches))
    }

    /// Backpropagate `dout` through the cached pass; returns gradients in
    /// `param_slices` order.
    pub(crate) fn backward(&self, caches: Vec<Cache>, dout: Array2<f64>) -> Vec<Vec<f64>> {
        let mut grads: Vec<Vec<f64>> = Vec::new();
        let mut d = dout;
        for (l, cache) in self.layers.iter().zip(caches).rev() {
            match (l, cache) {
                (Layer::Dense { w, activation, .. }, Cache::Dense { x, z }) => {
                    if *activation == Activation::Relu {
                        d.zip_mut_with(&z, |g, &zv| {
                            if zv <= 0.0 {
                                *g = 0.0
                            }
                        });
                    }
                    let dw = x.t().dot(&d);
                    let db = d.sum_axis(Axis(0));
                    let dx = d.dot(&w.t());
                    grads.push(db.into_raw_vec_and_offset().0);
                    grads.push(dw.as_standard_layout().iter().copied().collect());
                    d = dx;
                }
                (Layer::BatchNorm { gamma, .. }, Cache::BatchNorm { xhat, inv_std }) => {
                    let n = d.nrows() as f64;
                    let dgamma = (&d * &xhat).sum_axis(Axis(0));
                    let dbeta = d.sum_axis(Axis(0));
                    let dxhat = &d * gamma;
                    let sum_dxhat = dxhat.sum_axis(Axis(0));
                    let sum_dxhat_xhat = (&dxhat * &xhat).sum_axis(Axis(0));
                    let dx = (dxhat * n - &sum_dxhat - &(xhat * &sum_dxhat_xhat)) * &(inv_std / n);
                    grads.push(dbeta.into_raw_vec_and_offset().0);
                    grads.push(dgamma.into_raw_vec_and_offset().0);
                    d = dx;
                }
                (Layer::Dropout { .. }, Cache::Dropout { mask }) => {
                    if let Some(m) = mask {
                        d *= &m;
                    }
                }
                _ => unreachable!("cache does not match layer"),
            }
        }
        grads.reverse();
        grads
    }
}

/// Encoder/decoder regressor: `input_dim → 256 → 128 → 64 → 32 → 16` and back
/// out through `32 → 64 → 128 → 256 → out_dim`, with batch norm and 30%
/// dropout after the first two dense layers of each half.
pub fn build_autoencoder(input_dim: usize, out_dim: usize, seed: u64) -> Result<Mlp> {
    if out_dim == 0 {
        return Err(Error::Precondition("output width must be positive".into()));
    }
    use Activation::{None as Linear, Relu};
    let d = LayerSpec::dense;
    let bn = LayerSpec::BatchNorm;
    let drop = LayerSpec::Dropout { rate: 0.3 };
    let specs = vec![
        d(256, Relu),
        bn,
        drop,
        d(128, Relu),
        bn,
        drop,
        d(64, Linear),
        d(32, Linear),
        d(16, Relu),
        d(32, Linear),
        bn,
        drop,
        d(64, Linear),
        bn,
        drop,
        d(128, Linear),
        d(256, Linear),
        d(out_dim, Linear),
    ];
    Mlp::new(input_dim, specs, seed)
}
