//! Plain-text checkpoints.
//!
//! ```text
//! mlp input=3 seed=7
//! layer dense 256 relu
//! layer batchnorm
//! layer dropout 0.3
//! ...
//! array 0 kernel 3 256
//! <row-major values, one matrix row per line>
//! ```
//!
//! Values use 17 significant digits so a reload is bit-exact. Lines starting
//! with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Activation, Layer, LayerSpec, Mlp};
use crate::error::{Error, Result};

fn write_row(out: &mut String, values: &[f64]) {
    let row: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    out.push_str(&row.join(" "));
    out.push('\n');
}

fn write_matrix(out: &mut String, idx: usize, name: &str, rows: usize, cols: usize, data: &[f64]) {
    writeln!(out, "array {idx} {name} {rows} {cols}").unwrap();
    for r in 0..rows {
        write_row(out, &data[r * cols..(r + 1) * cols]);
    }
}

pub fn save_checkpoint(m: &Mlp) -> String {
    let mut out = String::new();
    writeln!(out, "mlp input={} seed={}", m.input_dim(), m.seed()).unwrap();
    for s in m.specs() {
        match s {
            LayerSpec::Dense { width, activation } => {
                writeln!(out, "layer dense {width} {}", activation.name()).unwrap()
            }
            LayerSpec::BatchNorm => out.push_str("layer batchnorm\n"),
            LayerSpec::Dropout { rate } => writeln!(out, "layer dropout {rate:.16e}").unwrap(),
        }
    }
    for (i, l) in m.layers.iter().enumerate() {
        match l {
            Layer::Dense { w, b, .. } => {
                write_matrix(&mut out, i, "kernel", w.nrows(), w.ncols(), w.as_slice().unwrap());
                write_matrix(&mut out, i, "bias", 1, b.len(), b.as_slice().unwrap());
            }
            Layer::BatchNorm {
                gamma,
                beta,
                mean,
                var,
            } => {
                for (name, a) in [("gamma", gamma), ("beta", beta), ("mean", mean), ("var", var)] {
                    write_matrix(&mut out, i, name, 1, a.len(), a.as_slice().unwrap());
                }
            }
            Layer::Dropout { .. } => {}
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Some((i + 1, t));
            }
        }
        None
    }
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("checkpoint line {line}: {msg}"))
}

pub fn load_checkpoint(text: &str) -> Result<Mlp> {
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
    };
    let (ln, head) = lines.next().ok_or_else(|| bad(1, "empty checkpoint"))?;
    let mut input = None;
    let mut seed = None;
    let mut parts = head.split_whitespace();
    if parts.next() != Some("mlp") {
        return Err(bad(ln, "expected `mlp` header"));
    }
    for kv in parts {
        match kv.split_once('=') {
            Some(("input", v)) => input = v.parse::<usize>().ok(),
            Some(("seed", v)) => seed = v.parse::<u64>().ok(),
            _ => return Err(bad(ln, format!("unexpected `{kv}`"))),
        }
    }
    let (input, seed) = (
        input.ok_or_else(|| bad(ln, "missing input"))?,
        seed.ok_or_else(|| bad(ln, "missing seed"))?,
    );

    let mut specs = Vec::new();
    let mut pending = None;
    while let Some((ln, line)) = lines.next() {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t[0] != "layer" {
            pending = Some((ln, line));
            break;
        }
        specs.push(match t.get(1..) {
            Some(["dense", w, act]) => LayerSpec::Dense {
                width: w.parse().map_err(|_| bad(ln, "bad width"))?,
                activation: match *act {
                    "relu" => Activation::Relu,
                    "none" => Activation::None,
                    _ => return Err(bad(ln, format!("unknown activation `{act}`"))),
                },
            },
            Some(["batchnorm"]) => LayerSpec::BatchNorm,
            Some(["dropout", r]) => LayerSpec::Dropout {
                rate: r.parse().map_err(|_| bad(ln, "bad rate"))?,
            },
            _ => return Err(bad(ln, "malformed layer")),
        });
    }

    let mut m = Mlp::new(input, specs, seed)?;
    let mut next_line = pending;
    let mut read_array = |want_idx: usize, want_name: &str, rows: usize, cols: usize| -> Result<Vec<f64>> {
        let (ln, line) = next_line
            .take()
            .or_else(|| lines.next())
            .ok_or_else(|| bad(0, format!("missing array {want_idx} {want_name}")))?;
        let t: Vec<&str> = line.split_whitespace().collect();
        let expect = ["array", &want_idx.to_string(), want_name, &rows.to_string(), &cols.to_string()];
        if t != expect {
            return Err(bad(ln, format!("expected `{}`", expect.join(" "))));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (ln, row) = lines.next().ok_or_else(|| bad(ln, "truncated array"))?;
            let vals: Vec<f64> = row
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| bad(ln, format!("bad number `{v}`"))))
                .collect::<Result<_>>()?;
            if vals.len() != cols {
                return Err(bad(ln, format!("expected {cols} values, found {}", vals.len())));
            }
            data.extend(vals);
        }
        Ok(data)
    };

    for (i, l) in m.layers.iter_mut().enumerate() {
        match l {
            Layer::Dense { w, b, .. } => {
                let (r, c) = w.dim();
                *w = Array2::from_shape_vec((r, c), read_array(i, "kernel", r, c)?)
                    .expect("shape checked");
                *b = Array1::from(read_array(i, "bias", 1, c)?);
            }
            Layer::BatchNorm {
                gamma,
                beta,
                mean,
                var,
            } => {
                let n = gamma.len();
                *gamma = Array1::from(read_array(i, "gamma", 1, n)?);
                *beta = Array1::from(read_array(i, "beta", 1, n)?);
                *mean = Array1::from(read_array(i, "mean", 1, n)?);
                *var = Array1::from(read_array(i, "var", 1, n)?);
            }
            Layer::Dropout { .. } => {}
        }
    }
    if let Some((ln, _)) = next_line.or_else(|| lines.next()) {
        return Err(bad(ln, "trailing content"));
    }
    Ok(m)
}

impl Mlp {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, save_checkpoint(self))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Mlp> {
        load_checkpoint(&std::fs::read_to_string(path)?)
    }
}
