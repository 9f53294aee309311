//! Victim classifiers: layered rotation ansatz with a CNOT chain, angle
//! encoding, ⟨Z₀⟩ readout and parameter-shift gradient descent.

mod data;
mod train;

pub use data::{load_idx, parse_idx, split, subsample, synthetic_blobs, Dataset};
pub use train::{
    accuracy, expectations, loss_and_gradient, params_from_text, params_to_text, predict,
    train_circuit, train_qnn, EpochLog, TrainedQnn,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangle {
    LinearChain,
    Ring,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    /// Rotations applied to every qubit in every layer.
    pub rotations: Vec<GateKind>,
    /// Optional per-layer override of `rotations`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer_rotations: Option<Vec<Vec<GateKind>>>,
    pub entangle: Entangle,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, n_layers: usize, rotations: Vec<GateKind>) -> AnsatzSpec {
        AnsatzSpec {
            n_qubits,
            n_layers,
            rotations,
            layer_rotations: None,
            entangle: Entangle::LinearChain,
        }
    }

    pub fn rotations_for(&self, layer: usize) -> &[GateKind] {
        match &self.layer_rotations {
            Some(per) => &per[layer],
            None => &self.rotations,
        }
    }

    pub fn n_params(&self) -> usize {
        (0..self.n_layers)
            .map(|l| self.rotations_for(l).len() * self.n_qubits)
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_layers == 0 {
            return Err(Error::Precondition("ansatz needs at least one qubit and one layer".into()));
        }
        if let Some(per) = &self.layer_rotations {
            if per.len() != self.n_layers {
                return Err(Error::Precondition(format!(
                    "layer_rotations has {} entries for {} layers",
                    per.len(),
                    self.n_layers
                )));
            }
        }
        for l in 0..self.n_layers {
            let r = self.rotations_for(l);
            if r.is_empty() || r.iter().any(|k| !k.is_rotation()) {
                return Err(Error::Precondition(format!(
                    "layer {l} rotations must be a nonempty list of rx/ry/rz"
                )));
            }
        }
        Ok(())
    }

    /// Short label such as `2Q 1-layer [rx,ry,rz]`.
    pub fn label(&self) -> String {
        let rots = match &self.layer_rotations {
            None => crate::structlut::kinds_to_string(&self.rotations),
            Some(per) => per
                .iter()
                .map(|r| crate::structlut::kinds_to_string(r))
                .collect::<Vec<_>>()
                .join("|"),
        };
        format!("{}Q {}-layer [{}]", self.n_qubits, self.n_layers, rots)
    }
}

/// Tagged, unbound ansatz. Within a layer tags run qubit-major,
/// rotation-minor; layers follow each other.
pub fn build_ansatz(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    let n = spec.n_qubits;
    let mut c = Circuit::new(n)?;
    let mut tag = 0;
    for layer in 0..spec.n_layers {
        for q in 0..n {
            for &kind in spec.rotations_for(layer) {
                c.push(Gate::tagged(kind, q, tag))?;
                tag += 1;
            }
        }
        match spec.entangle {
            Entangle::LinearChain => {
                for q in 0..n.saturating_sub(1) {
                    c.push(Gate::cnot(q, q + 1))?;
                }
            }
            Entangle::Ring => {
                for q in 0..n.saturating_sub(1) {
                    c.push(Gate::cnot(q, q + 1))?;
                }
                if n > 2 {
                    c.push(Gate::cnot(n - 1, 0))?;
                }
            }
            Entangle::None => {}
        }
    }
    Ok(c)
}

/// State-preparation prefix `RY(π·fᵢ)` on qubit i.
pub fn encode(features: &[f64], n_qubits: usize) -> Result<Circuit> {
    if features.len() != n_qubits {
        return Err(Error::Dimension {
            expected: n_qubits,
            got: features.len(),
        });
    }
    let mut c = Circuit::new(n_qubits)?;
    for (q, &f) in features.iter().enumerate() {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Precondition(format!("feature {f} on qubit {q} outside [0, 1]")));
        }
        c.push(Gate::ry(q, PI * f))?;
    }
    Ok(c)
}

/// Reference classifier shapes: 2 qubits with `[rx, ry, rz]`, 4 and 8 qubits
/// with `[ry, rz]`, each at 1 to 3 layers.
pub fn reference_shapes() -> Vec<AnsatzSpec> {
    use GateKind::*;
    let mut out = Vec::new();
    for layers in 1..=3 {
        out.push(AnsatzSpec::new(2, layers, vec![Rx, Ry, Rz]));
    }
    for n in [4, 8] {
        for layers in 1..=3 {
            out.push(AnsatzSpec::new(n, layers, vec![Ry, Rz]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{run, Statevector};
    use GateKind::*;

    #[test]
    fn ansatz_examples() {
        let c = build_ansatz(&AnsatzSpec::new(2, 1, vec![Rx, Ry, Rz])).unwrap();
        assert_eq!(c.tags().len(), 6);
        assert_eq!(c.len(), 7);
        assert_eq!(c.gates()[6], Gate::cnot(0, 1));
        assert_eq!(c.gates()[3], Gate::tagged(Rx, 1, 3));

        let c = build_ansatz(&AnsatzSpec::new(4, 3, vec![Ry, Rz])).unwrap();
        assert_eq!(c.tags().len(), 24);

        let mut s = AnsatzSpec::new(1, 1, vec![Rz]);
        s.entangle = Entangle::None;
        let c = build_ansatz(&s).unwrap();
        assert_eq!(c.gates(), &[Gate::tagged(Rz, 0, 0)]);
    }

    #[test]
    fn reference_param_counts() {
        let counts: Vec<usize> = reference_shapes().iter().map(|s| s.n_params()).collect();
        assert_eq!(counts, vec![6, 12, 18, 8, 16, 24, 16, 32, 48]);
    }

    #[test]
    fn per_layer_rotations() {
        let mut s = AnsatzSpec::new(1, 3, vec![Ry]);
        s.layer_rotations = Some(vec![vec![Ry], vec![Ry], vec![Ry, Rz]]);
        assert_eq!(s.n_params(), 4);
        assert_eq!(build_ansatz(&s).unwrap().tags().len(), 4);
        s.layer_rotations = Some(vec![vec![Ry]]);
        assert!(build_ansatz(&s).is_err());
    }

    #[test]
    fn encode_examples() {
        let c = encode(&[0.0, 0.0], 2).unwrap();
        let s = run(&c, &Statevector::zero(2)).unwrap();
        assert!((s.amplitudes()[0].re - 1.0).abs() < 1e-15);

        let c = encode(&[1.0], 1).unwrap();
        let s = run(&c, &Statevector::zero(1)).unwrap();
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-12);

        let c = encode(&[0.5, 0.25], 2).unwrap();
        assert!((c.gates()[0].angle().unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((c.gates()[1].angle().unwrap() - PI / 4.0).abs() < 1e-15);

        assert!(encode(&[1.5], 1).is_err());
        assert!(encode(&[0.5], 2).is_err());
    }
}
