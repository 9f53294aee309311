use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Binary-labelled samples with features in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Dataset> {
        if features.len() != labels.len() {
            return Err(Error::Dimension {
                expected: features.len(),
                got: labels.len(),
            });
        }
        if let Some(w) = features.first().map(Vec::len) {
            if features.iter().any(|f| f.len() != w) {
                return Err(Error::Precondition("ragged feature rows".into()));
            }
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Precondition("labels must be 0 or 1".into()));
        }
        Ok(Dataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Readout target: +1 for label 0, −1 for label 1.
    pub fn target(&self, i: usize) -> f64 {
        if self.labels[i] == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Two Gaussian blobs (σ = 0.15) centred at 0.3·1 (label 0) and 0.7·1
/// (label 1), clipped to [0, 1]. Labels alternate so both classes are
/// equally represented.
pub fn synthetic_blobs(n_samples: usize, n_features: usize, seed: u64) -> Result<Dataset> {
    if n_samples == 0 || n_features == 0 {
        return Err(Error::Precondition("synthetic data needs samples and features".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.15).expect("valid sigma");
    let mut features = Vec::with_capacity(n_samples);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let label = (i % 2) as u8;
        let center: f64 = if label == 0 { 0.3 } else { 0.7 };
        features.push(
            (0..n_features)
                .map(|_| (center + noise.sample(&mut rng)).clamp(0.0, 1.0))
                .collect(),
        );
        labels.push(label);
    }
    Dataset::new(features, labels)
}

/// Seeded shuffle, then the first `1 − eval_fraction` for training.
pub fn split(ds: &Dataset, eval_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(eval_fraction > 0.0 && eval_fraction < 1.0) || ds.len() < 2 {
        return Err(Error::Precondition(format!(
            "cannot split {} samples with eval fraction {eval_fraction}",
            ds.len()
        )));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_eval = ((ds.len() as f64 * eval_fraction).round() as usize).clamp(1, ds.len() - 1);
    let (eval, train) = idx.split_at(n_eval);
    Ok((ds.subset(train), ds.subset(eval)))
}

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{what}: truncated header")))
}

/// Split `len` into `parts` contiguous ranges of (near-)equal size.
fn bounds(len: usize, parts: usize) -> Vec<(usize, usize)> {
    (0..parts).map(|i| (i * len / parts, (i + 1) * len / parts)).collect()
}

/// Block grid `rows × cols = n` closest to square.
fn block_grid(n: usize) -> (usize, usize) {
    let mut r = (n as f64).sqrt().floor() as usize;
    while !n.is_multiple_of(r) {
        r -= 1;
    }
    (r, n / r)
}

/// Parse in-memory IDX images/labels, keep two labels (`a → 0`, `b → 1`)
/// and average-pool every image into `n_features` blocks scaled to [0, 1].
pub fn parse_idx(images: &[u8], labels: &[u8], keep: (u8, u8), n_features: usize) -> Result<Dataset> {
    if be_u32(images, 0, "images")? != 0x0000_0803 {
        return Err(Error::Format("images: bad magic (expected 0x00000803)".into()));
    }
    if be_u32(labels, 0, "labels")? != 0x0000_0801 {
        return Err(Error::Format("labels: bad magic (expected 0x00000801)".into()));
    }
    let n_img = be_u32(images, 4, "images")? as usize;
    let rows = be_u32(images, 8, "images")? as usize;
    let cols = be_u32(images, 12, "images")? as usize;
    let n_lab = be_u32(labels, 4, "labels")? as usize;
    if n_img != n_lab {
        return Err(Error::Format(format!("{n_img} images but {n_lab} labels")));
    }
    let px = rows * cols;
    if images.len() != 16 + n_img * px {
        return Err(Error::Format(format!(
            "images: expected {} bytes, found {}",
            16 + n_img * px,
            images.len()
        )));
    }
    if labels.len() != 8 + n_lab {
        return Err(Error::Format(format!(
            "labels: expected {} bytes, found {}",
            8 + n_lab,
            labels.len()
        )));
    }
    if n_features == 0 {
        return Err(Error::Precondition("n_features must be positive".into()));
    }
    let (br, bc) = block_grid(n_features);
    if br > rows || bc > cols {
        return Err(Error::Precondition(format!(
            "cannot pool a {rows}×{cols} image into {br}×{bc} blocks"
        )));
    }
    let (rb, cb) = (bounds(rows, br), bounds(cols, bc));

    let mut features = Vec::new();
    let mut out_labels = Vec::new();
    for i in 0..n_img {
        let lab = labels[8 + i];
        let mapped = if lab == keep.0 {
            0
        } else if lab == keep.1 {
            1
        } else {
            continue;
        };
        let img = &images[16 + i * px..16 + (i + 1) * px];
        let mut f = Vec::with_capacity(n_features);
        for &(r0, r1) in &rb {
            for &(c0, c1) in &cb {
                let mut sum = 0u64;
                for r in r0..r1 {
                    for c in c0..c1 {
                        sum += img[r * cols + c] as u64;
                    }
                }
                let area = ((r1 - r0) * (c1 - c0)) as f64;
                f.push(sum as f64 / area / 255.0);
            }
        }
        features.push(f);
        out_labels.push(mapped);
    }
    Dataset::new(features, out_labels)
}

pub fn load_idx(images: &Path, labels: &Path, keep: (u8, u8), n_features: usize) -> Result<Dataset> {
    parse_idx(&std::fs::read(images)?, &std::fs::read(labels)?, keep, n_features)
}

/// Random subsample of at most `n` rows, original order kept.
pub fn subsample(ds: &Dataset, n: usize, seed: u64) -> Dataset {
    if ds.len() <= n {
        return ds.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut rng);
    idx.truncate(n);
    idx.sort_unstable();
    ds.subset(&idx)
}
