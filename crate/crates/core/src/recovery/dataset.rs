use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use crate::circuit::{wrap_angle, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::structlut::{kinds_from_str, kinds_to_string, validate_template, Template};
use crate::transpiler::{transpile, TranspileOptions};

/// Grid values `−π + i·step` up to π inclusive, each wrapped into (−π, π]
/// (so the first one is stored as π).
pub fn grid_values(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Precondition(format!("grid step must be positive, got {step}")));
    }
    let pi = std::f64::consts::PI;
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let v = -pi + i as f64 * step;
        if v > pi + 1e-12 {
            break;
        }
        out.push(wrap_angle(v));
        i += 1;
    }
    Ok(out)
}

/// The `idx`-th tuple of the k-dimensional grid, first coordinate slowest.
pub(crate) fn grid_tuple(values: &[f64], k: usize, mut idx: usize) -> Vec<f64> {
    let g = values.len();
    let mut t = vec![0.0; k];
    for slot in t.iter_mut().rev() {
        *slot = values[idx % g];
        idx /= g;
    }
    t
}

/// One-qubit circuit running `template` at `angles`.
pub fn template_circuit(template: &[GateKind], angles: &[f64]) -> Result<Circuit> {
    let mut c = Circuit::new(1)?;
    for (&k, &a) in template.iter().zip(angles) {
        c.push(Gate::rotation(k, 0, a))?;
    }
    Ok(c)
}

/// Level-0 canonical RZ triple (execution order) of a bound 1-qubit circuit.
pub(crate) fn canonical_rz(c: &Circuit) -> Result<[f64; 3]> {
    let out = transpile(c, &TranspileOptions::linear(1, 0))?.circuit;
    let rz: Vec<f64> = out
        .gates()
        .iter()
        .filter(|g| g.kind() == GateKind::Rz)
        .map(|g| g.angle().expect("bound"))
        .collect();
    match rz.as_slice() {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(Error::Precondition("level-0 pattern without three RZ angles".into())),
    }
}

/// Template grid with transpiled RZ angles as inputs (`x`, 3 columns) and
/// the original angles as targets (`y`, k columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDataset {
    pub template: Template,
    pub step: f64,
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    /// Rows whose `x` equals an earlier row's (non-injective forward map).
    pub duplicate_inputs: usize,
}

impl ParamDataset {
    pub fn k(&self) -> usize {
        self.template.len()
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "dataset template={} step={:.16e} rows={} duplicates={}",
            kinds_to_string(&self.template),
            self.step,
            self.len(),
            self.duplicate_inputs
        )
        .unwrap();
        for (xr, yr) in self.x.rows().into_iter().zip(self.y.rows()) {
            let xs: Vec<String> = xr.iter().map(|v| format!("{v:.16e}")).collect();
            let ys: Vec<String> = yr.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(s, "{} | {}", xs.join(" "), ys.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<ParamDataset> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let head = lines.next().ok_or_else(|| Error::Format("empty dataset file".into()))?;
        let mut template = None;
        let mut step = None;
        let mut rows = None;
        let mut dups = None;
        let mut parts = head.split_whitespace();
        if parts.next() != Some("dataset") {
            return Err(Error::Format("expected `dataset` header".into()));
        }
        for kv in parts {
            match kv.split_once('=') {
                Some(("template", v)) => template = Some(kinds_from_str(v)?),
                Some(("step", v)) => step = v.parse::<f64>().ok(),
                Some(("rows", v)) => rows = v.parse::<usize>().ok(),
                Some(("duplicates", v)) => dups = v.parse::<usize>().ok(),
                _ => return Err(Error::Format(format!("unexpected header field `{kv}`"))),
            }
        }
        let bad = || Error::Format("incomplete dataset header".into());
        let template = template.ok_or_else(bad)?;
        validate_template(&template)?;
        let (step, rows, dups) = (step.ok_or_else(bad)?, rows.ok_or_else(bad)?, dups.ok_or_else(bad)?);
        let k = template.len();
        let mut xs = Vec::with_capacity(rows * 3);
        let mut ys = Vec::with_capacity(rows * k);
        let mut n = 0;
        for line in lines {
            let (a, b) = line
                .split_once('|')
                .ok_or_else(|| Error::Format(format!("row {} lacks `|`", n + 1)))?;
            let parse = |s: &str| -> Result<Vec<f64>> {
                s.split_whitespace()
                    .map(|v| v.parse::<f64>().map_err(|_| Error::Format(format!("bad number `{v}`"))))
                    .collect()
            };
            let (xr, yr) = (parse(a)?, parse(b)?);
            if xr.len() != 3 || yr.len() != k {
                return Err(Error::Format(format!("row {} has wrong width", n + 1)));
            }
            xs.extend(xr);
            ys.extend(yr);
            n += 1;
        }
        if n != rows {
            return Err(Error::Format(format!("header says {rows} rows, found {n}")));
        }
        Ok(ParamDataset {
            template,
            step,
            x: Array2::from_shape_vec((n, 3), xs).expect("checked"),
            y: Array2::from_shape_vec((n, k), ys).expect("checked"),
            duplicate_inputs: dups,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ParamDataset> {
        ParamDataset::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Enumerate the template's grid and transpile every point at level 0.
pub fn gen_dataset(template: &[GateKind], step: f64) -> Result<ParamDataset> {
    validate_template(template)?;
    let k = template.len();
    if k > 3 {
        return Err(Error::Unsupported(format!(
            "grid datasets for {k}-parameter templates (at most 3)"
        )));
    }
    let values = grid_values(step)?;
    let total = values.len().pow(k as u32);
    let rows: Vec<([f64; 3], Vec<f64>)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let y = grid_tuple(&values, k, i);
            let x = canonical_rz(&template_circuit(template, &y)?)?;
            Ok((x, y))
        })
        .collect::<Result<_>>()?;

    let mut keys: Vec<[u64; 3]> = rows
        .iter()
        .map(|(x, _)| x.map(|v| ((v * 1e9).round() as i64) as u64))
        .collect();
    keys.sort_unstable();
    let distinct = {
        let mut d = keys.clone();
        d.dedup();
        d.len()
    };

    let mut x = Array2::zeros((total, 3));
    let mut y = Array2::zeros((total, k));
    for (i, (xr, yr)) in rows.into_iter().enumerate() {
        for j in 0..3 {
            x[[i, j]] = xr[j];
        }
        for j in 0..k {
            y[[i, j]] = yr[j];
        }
    }
    Ok(ParamDataset {
        template: template.to_vec(),
        step,
        x,
        y,
        duplicate_inputs: total - distinct,
    })
}
