use std::f64::consts::FRAC_PI_2;
use std::fmt::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{build_ansatz, encode, AnsatzSpec, Dataset};
use crate::circuit::{wrap_angle, Circuit};
use crate::error::{Error, Result};
use crate::simulator::{run, Statevector};

const INIT_STD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Loss and accuracy of the parameters entering this epoch's step.
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedQnn {
    pub spec: AnsatzSpec,
    pub ansatz: Circuit,
    pub params: Vec<f64>,
    pub log: Vec<EpochLog>,
}

impl TrainedQnn {
    pub fn bound(&self) -> Result<Circuit> {
        self.ansatz.bind_values(&self.params)
    }
}

/// Encoded input states on `width` qubits; features occupy the low qubits.
fn encoded_states(ds: &Dataset, width: usize) -> Result<Vec<Statevector>> {
    let nf = ds.n_features();
    if nf > width {
        return Err(Error::Dimension {
            expected: width,
            got: nf,
        });
    }
    ds.features
        .iter()
        .map(|f| {
            let prefix = encode(f, nf)?.widened(width)?;
            run(&prefix, &Statevector::zero(width))
        })
        .collect()
}

fn expvals(bound: &Circuit, states: &[Statevector]) -> Result<Vec<f64>> {
    states
        .par_iter()
        .map(|s| Ok(run(bound, s)?.expval_z(0)))
        .collect()
}

/// ⟨Z₀⟩ of encode+ansatz for every sample.
pub fn expectations(ansatz: &Circuit, params: &[f64], ds: &Dataset) -> Result<Vec<f64>> {
    let states = encoded_states(ds, ansatz.n_qubits())?;
    expvals(&ansatz.bind_values(params)?, &states)
}

fn label_of(e: f64) -> u8 {
    if e >= 0.0 {
        0
    } else {
        1
    }
}

/// `(⟨Z₀⟩, label)`; label 0 when the expectation is non-negative.
pub fn predict(ansatz: &Circuit, params: &[f64], features: &[f64]) -> Result<(f64, u8)> {
    let ds = Dataset::new(vec![features.to_vec()], vec![0])?;
    let e = expectations(ansatz, params, &ds)?[0];
    Ok((e, label_of(e)))
}

pub fn accuracy(ansatz: &Circuit, params: &[f64], ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::Precondition("accuracy of an empty dataset".into()));
    }
    let e = expectations(ansatz, params, ds)?;
    Ok(accuracy_of(&e, ds))
}

fn accuracy_of(e: &[f64], ds: &Dataset) -> f64 {
    let hits = e
        .iter()
        .zip(&ds.labels)
        .filter(|(&e, &l)| label_of(e) == l)
        .count();
    hits as f64 / ds.len() as f64
}

fn mse_of(e: &[f64], ds: &Dataset) -> f64 {
    e.iter()
        .enumerate()
        .map(|(i, v)| (v - ds.target(i)).powi(2))
        .sum::<f64>()
        / ds.len() as f64
}

fn check_tags(ansatz: &Circuit, params: &[f64]) -> Result<()> {
    let mut seen = vec![false; params.len()];
    for g in ansatz.gates() {
        if let Some(t) = g.tag() {
            if t >= params.len() {
                return Err(Error::MissingParam(t));
            }
            if seen[t] {
                return Err(Error::Precondition(format!(
                    "parameter slot {t} is shared by several gates; the shift rule needs one gate per slot"
                )));
            }
            seen[t] = true;
        }
    }
    Ok(())
}

fn loss_grad_on(
    ansatz: &Circuit,
    params: &[f64],
    ds: &Dataset,
    states: &[Statevector],
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let e0 = expvals(&ansatz.bind_values(params)?, states)?;
    let loss = mse_of(&e0, ds);
    let n = ds.len() as f64;
    let mut grad = vec![0.0; params.len()];
    let mut shifted = params.to_vec();
    for (t, g) in grad.iter_mut().enumerate() {
        shifted[t] = params[t] + FRAC_PI_2;
        let up = expvals(&ansatz.bind_values(&shifted)?, states)?;
        shifted[t] = params[t] - FRAC_PI_2;
        let down = expvals(&ansatz.bind_values(&shifted)?, states)?;
        shifted[t] = params[t];
        *g = (0..ds.len())
            .map(|i| 2.0 * (e0[i] - ds.target(i)) * (up[i] - down[i]) / 2.0)
            .sum::<f64>()
            / n;
    }
    Ok((loss, grad, e0))
}

/// MSE loss and its parameter-shift gradient.
pub fn loss_and_gradient(ansatz: &Circuit, params: &[f64], ds: &Dataset) -> Result<(f64, Vec<f64>)> {
    check_tags(ansatz, params)?;
    let states = encoded_states(ds, ansatz.n_qubits())?;
    let (l, g, _) = loss_grad_on(ansatz, params, ds, &states)?;
    Ok((l, g))
}

/// Full-batch gradient descent from `init`; angles are re-wrapped after
/// every step.
pub fn train_circuit(
    ansatz: &Circuit,
    init: &[f64],
    ds: &Dataset,
    epochs: usize,
    lr: f64,
) -> Result<(Vec<f64>, Vec<EpochLog>)> {
    if ds.is_empty() {
        return Err(Error::Precondition("training on an empty dataset".into()));
    }
    check_tags(ansatz, init)?;
    let states = encoded_states(ds, ansatz.n_qubits())?;
    let mut params = init.to_vec();
    let mut log = Vec::with_capacity(epochs);
    for epoch in 1..=epochs {
        let (loss, grad, e0) = loss_grad_on(ansatz, &params, ds, &states)?;
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        log.push(EpochLog {
            epoch,
            loss,
            accuracy: accuracy_of(&e0, ds),
        });
        for (p, g) in params.iter_mut().zip(&grad) {
            *p = wrap_angle(*p - lr * g);
        }
    }
    Ok((params, log))
}

/// Train a fresh classifier; initial angles ~ N(0, 0.1²) from `seed`.
pub fn train_qnn(spec: &AnsatzSpec, ds: &Dataset, epochs: usize, lr: f64, seed: u64) -> Result<TrainedQnn> {
    let ansatz = build_ansatz(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, INIT_STD).expect("valid std");
    let init: Vec<f64> = (0..spec.n_params()).map(|_| normal.sample(&mut rng)).collect();
    let (params, log) = train_circuit(&ansatz, &init, ds, epochs, lr)?;
    Ok(TrainedQnn {
        spec: spec.clone(),
        ansatz,
        params,
        log,
    })
}

/// One value per line, 17 significant digits.
pub fn params_to_text(params: &[f64]) -> String {
    let mut s = format!("# {} parameters\n", params.len());
    for p in params {
        writeln!(s, "{p:.16e}").unwrap();
    }
    s
}

pub fn params_from_text(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Format(format!("bad parameter value `{l}`")))
        })
        .collect()
}
