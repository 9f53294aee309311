//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered gate list over `n_qubits` wires plus a tracked
//! global phase. Gate order is execution order. Rotation angles and the global
//! phase are always kept in the canonical range (−π, π]; whenever an angle is
//! shifted by 2πk to get there, the phase absorbs the resulting (−1)^k so the
//! circuit's unitary is unchanged.

mod text;

pub use text::{parse, serialize};

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Wrap a finite angle into (−π, π].
pub fn normalize_angle(a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidAngle(a));
    }
    Ok(wrap_angle(a))
}

/// Infallible variant of [`normalize_angle`] for values known to be finite.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TWO_PI);
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// Wrap `a` and return the number of 2π turns removed, so that
/// `a == wrapped + 2π·turns` up to rounding.
pub(crate) fn wrap_with_turns(a: f64) -> (f64, i64) {
    let w = wrap_angle(a);
    let turns = ((a - w) / TWO_PI).round() as i64;
    (w, turns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    X,
    Sx,
    Id,
    H,
    Cnot,
    Swap,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::X,
        GateKind::Sx,
        GateKind::Id,
        GateKind::H,
        GateKind::Cnot,
        GateKind::Swap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::X => "x",
            GateKind::Sx => "sx",
            GateKind::Id => "id",
            GateKind::H => "h",
            GateKind::Cnot => "cnot",
            GateKind::Swap => "swap",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Swap => 2,
            _ => 1,
        }
    }

    /// Member of the hardware basis `[id, x, sx, cnot, rz]`.
    pub fn is_basis(self) -> bool {
        matches!(
            self,
            GateKind::Id | GateKind::X | GateKind::Sx | GateKind::Cnot | GateKind::Rz
        )
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Angle operand of a rotation: either a bound value or a trainable slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Param {
    Value(f64),
    Tag(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    kind: GateKind,
    qubits: [usize; 2],
    param: Option<Param>,
}

impl Gate {
    /// Build a gate, checking arity, distinct operands and parameter presence.
    /// Qubit range is checked when the gate is pushed into a circuit.
    pub fn new(kind: GateKind, qubits: &[usize], param: Option<Param>) -> Result<Gate> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{kind} takes {} qubit(s), got {}",
                kind.arity(),
                qubits.len()
            )));
        }
        if kind.arity() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidGate(format!(
                "{kind} operands must be distinct (q{} twice)",
                qubits[0]
            )));
        }
        if kind.is_rotation() != param.is_some() {
            return Err(Error::InvalidGate(format!(
                "{kind} {} an angle",
                if kind.is_rotation() { "requires" } else { "takes no" }
            )));
        }
        if let Some(Param::Value(v)) = param {
            if !v.is_finite() {
                return Err(Error::InvalidAngle(v));
            }
        }
        let mut q = [0; 2];
        q[..qubits.len()].copy_from_slice(qubits);
        Ok(Gate {
            kind,
            qubits: q,
            param,
        })
    }

    fn one(kind: GateKind, q: usize, param: Option<Param>) -> Gate {
        Gate {
            kind,
            qubits: [q, 0],
            param,
        }
    }

    pub fn rotation(kind: GateKind, q: usize, angle: f64) -> Gate {
        assert!(kind.is_rotation(), "{kind} is not a rotation");
        Gate::one(kind, q, Some(Param::Value(angle)))
    }

    pub fn tagged(kind: GateKind, q: usize, tag: usize) -> Gate {
        assert!(kind.is_rotation(), "{kind} is not a rotation");
        Gate::one(kind, q, Some(Param::Tag(tag)))
    }

    pub fn rx(q: usize, angle: f64) -> Gate {
        Gate::rotation(GateKind::Rx, q, angle)
    }
    pub fn ry(q: usize, angle: f64) -> Gate {
        Gate::rotation(GateKind::Ry, q, angle)
    }
    pub fn rz(q: usize, angle: f64) -> Gate {
        Gate::rotation(GateKind::Rz, q, angle)
    }
    pub fn x(q: usize) -> Gate {
        Gate::one(GateKind::X, q, None)
    }
    pub fn sx(q: usize) -> Gate {
        Gate::one(GateKind::Sx, q, None)
    }
    pub fn id(q: usize) -> Gate {
        Gate::one(GateKind::Id, q, None)
    }
    pub fn h(q: usize) -> Gate {
        Gate::one(GateKind::H, q, None)
    }
    pub fn cnot(control: usize, target: usize) -> Gate {
        assert_ne!(control, target, "cnot operands must differ");
        Gate {
            kind: GateKind::Cnot,
            qubits: [control, target],
            param: None,
        }
    }
    pub fn swap(a: usize, b: usize) -> Gate {
        assert_ne!(a, b, "swap operands must differ");
        Gate {
            kind: GateKind::Swap,
            qubits: [a, b],
            param: None,
        }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn param(&self) -> Option<Param> {
        self.param
    }

    pub fn angle(&self) -> Option<f64> {
        match self.param {
            Some(Param::Value(v)) => Some(v),
            _ => None,
        }
    }

    pub fn tag(&self) -> Option<usize> {
        match self.param {
            Some(Param::Tag(t)) => Some(t),
            _ => None,
        }
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.qubits().contains(&q)
    }

    /// Same gate moved to other wires.
    pub fn relabeled(&self, map: impl Fn(usize) -> usize) -> Gate {
        let mut g = *self;
        for q in g.qubits.iter_mut().take(self.kind.arity()) {
            *q = map(*q);
        }
        g
    }

    pub(crate) fn with_param(&self, param: Param) -> Gate {
        let mut g = *self;
        g.param = Some(param);
        g
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for (i, q) in self.qubits().iter().enumerate() {
            write!(f, "{}q{q}", if i == 0 { " " } else { ", " })?;
        }
        match self.param {
            Some(Param::Value(v)) => write!(f, ", {v}"),
            Some(Param::Tag(t)) => write!(f, ", param{t}"),
            None => Ok(()),
        }
    }
}

/// Trainable parameter values indexed by slot number.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<ParamVector> {
        let values = values
            .into_iter()
            .map(normalize_angle)
            .collect::<Result<Vec<_>>>()?;
        Ok(ParamVector { values })
    }

    pub fn zeros(n: usize) -> ParamVector {
        ParamVector {
            values: vec![0.0; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, tag: usize) -> Option<f64> {
        self.values.get(tag).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    global_phase: f64,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Circuit> {
        if n_qubits == 0 {
            return Err(Error::InvalidGate("circuit needs at least one qubit".into()));
        }
        Ok(Circuit {
            n_qubits,
            gates: Vec::new(),
            global_phase: 0.0,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    pub fn add_phase(&mut self, phase: f64) {
        self.global_phase = wrap_angle(self.global_phase + phase);
    }

    pub fn set_phase(&mut self, phase: f64) -> Result<()> {
        self.global_phase = normalize_angle(phase)?;
        Ok(())
    }

    /// Append a gate. Rotation angles are wrapped into (−π, π] and the phase
    /// compensates, since R(a + 2πk) = (−1)^k R(a).
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for &q in gate.qubits() {
            if q >= self.n_qubits {
                return Err(Error::InvalidGate(format!(
                    "qubit q{q} out of range for {}-qubit circuit",
                    self.n_qubits
                )));
            }
        }
        let mut gate = gate;
        if let Some(Param::Value(v)) = gate.param {
            if !v.is_finite() {
                return Err(Error::InvalidAngle(v));
            }
            let (w, turns) = wrap_with_turns(v);
            if turns != 0 {
                gate.param = Some(Param::Value(w));
                if turns % 2 != 0 {
                    self.add_phase(PI);
                }
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn from_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Circuit> {
        let mut c = Circuit::new(n_qubits)?;
        c.extend(gates)?;
        Ok(c)
    }

    /// Sorted distinct parameter slots referenced by the circuit.
    pub fn tags(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.gates.iter().filter_map(Gate::tag).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    pub fn is_bound(&self) -> bool {
        self.gates.iter().all(|g| g.tag().is_none())
    }

    pub(crate) fn require_bound(&self) -> Result<()> {
        match self.gates.iter().find_map(Gate::tag) {
            Some(t) => Err(Error::Unbound(t)),
            None => Ok(()),
        }
    }

    /// Replace every tagged angle by its value in `params`.
    pub fn bind(&self, params: &ParamVector) -> Result<Circuit> {
        let mut out = Circuit {
            n_qubits: self.n_qubits,
            gates: Vec::with_capacity(self.gates.len()),
            global_phase: self.global_phase,
        };
        for g in &self.gates {
            match g.param {
                Some(Param::Tag(t)) => {
                    let v = params.get(t).ok_or(Error::MissingParam(t))?;
                    out.push(g.with_param(Param::Value(v)))?;
                }
                _ => out.gates.push(*g),
            }
        }
        Ok(out)
    }

    /// Bind from a raw slice without the ParamVector normalization pass.
    pub fn bind_values(&self, values: &[f64]) -> Result<Circuit> {
        let mut out = Circuit {
            n_qubits: self.n_qubits,
            gates: Vec::with_capacity(self.gates.len()),
            global_phase: self.global_phase,
        };
        for g in &self.gates {
            match g.param {
                Some(Param::Tag(t)) => {
                    let v = *values.get(t).ok_or(Error::MissingParam(t))?;
                    out.push(g.with_param(Param::Value(v)))?;
                }
                _ => out.gates.push(*g),
            }
        }
        Ok(out)
    }

    /// Concatenate `other` after `self`; widths must match.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        self.add_phase(other.global_phase);
        Ok(())
    }

    /// Same gates on a wider register (new wires idle).
    pub fn widened(&self, n_qubits: usize) -> Result<Circuit> {
        if n_qubits < self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                got: n_qubits,
            });
        }
        Ok(Circuit {
            n_qubits,
            gates: self.gates.clone(),
            global_phase: self.global_phase,
        })
    }

    /// Adjoint circuit. Requires bound rotations.
    pub fn inverse(&self) -> Result<Circuit> {
        self.require_bound()?;
        let mut out = Circuit::new(self.n_qubits)?;
        out.global_phase = wrap_angle(-self.global_phase);
        for g in self.gates.iter().rev() {
            match g.kind {
                GateKind::Rx | GateKind::Ry | GateKind::Rz => {
                    let a = g.angle().expect("bound rotation");
                    out.push(Gate::rotation(g.kind, g.qubits[0], -a))?;
                }
                // SX† = SX³ = X·SX
                GateKind::Sx => {
                    out.push(Gate::sx(g.qubits[0]))?;
                    out.push(Gate::x(g.qubits[0]))?;
                }
                _ => out.gates.push(*g),
            }
        }
        Ok(out)
    }

    pub(crate) fn gates_mut(&mut self) -> &mut Vec<Gate> {
        &mut self.gates
    }

    /// Gates sorted by (ASAP moment, lowest qubit). Two circuits with the same
    /// dependency structure produce the same ordering regardless of how
    /// commuting gates on disjoint wires were interleaved.
    pub fn canonical_order(&self) -> Vec<Gate> {
        let mut depth = vec![0usize; self.n_qubits];
        let mut keyed: Vec<(usize, usize, usize, Gate)> = Vec::with_capacity(self.gates.len());
        for (i, g) in self.gates.iter().enumerate() {
            let layer = g.qubits().iter().map(|&q| depth[q]).max().unwrap_or(0);
            for &q in g.qubits() {
                depth[q] = layer + 1;
            }
            let lo = *g.qubits().iter().min().expect("gate has qubits");
            keyed.push((layer, lo, i, *g));
        }
        keyed.sort_by_key(|&(layer, lo, i, _)| (layer, lo, i));
        keyed.into_iter().map(|(_, _, _, g)| g).collect()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_angle(0.0).unwrap(), 0.0);
        assert!((normalize_angle(3.0 * PI).unwrap() - PI).abs() < 1e-12);
        let w = normalize_angle(-3.2).unwrap();
        assert!((w - (-3.2 + 2.0 * PI)).abs() < 1e-12);
        assert!((w - 3.0832).abs() < 1e-4);
        assert_eq!(normalize_angle(-PI).unwrap(), PI);
        assert!(matches!(normalize_angle(f64::NAN), Err(Error::InvalidAngle(_))));
        assert!(normalize_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn push_wraps_and_tracks_phase() {
        let mut c = Circuit::new(1).unwrap();
        c.push(Gate::rz(0, 3.0 * PI)).unwrap();
        assert!((c.gates()[0].angle().unwrap() - PI).abs() < 1e-12);
        assert!((c.global_phase() - PI).abs() < 1e-12);
    }

    #[test]
    fn bind_examples() {
        let c = Circuit::from_gates(1, [Gate::tagged(GateKind::Rx, 0, 0)]).unwrap();
        let b = c.bind(&ParamVector::new(vec![0.5]).unwrap()).unwrap();
        assert_eq!(b.gates()[0], Gate::rx(0, 0.5));
        assert!(b.is_bound());

        let plain = Circuit::from_gates(2, [Gate::h(0), Gate::cnot(0, 1)]).unwrap();
        assert_eq!(plain.bind(&ParamVector::default()).unwrap(), plain);

        let missing = c.bind(&ParamVector::default());
        assert!(matches!(missing, Err(Error::MissingParam(0))));
    }

    #[test]
    fn bind_six_slot_ansatz() {
        let mut c = Circuit::new(2).unwrap();
        let mut tag = 0;
        for q in 0..2 {
            for k in [GateKind::Rx, GateKind::Ry, GateKind::Rz] {
                c.push(Gate::tagged(k, q, tag)).unwrap();
                tag += 1;
            }
        }
        c.push(Gate::cnot(0, 1)).unwrap();
        let p = ParamVector::new(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let b = c.bind(&p).unwrap();
        assert_eq!(b.len(), c.len());
        let angles: Vec<f64> = b.gates().iter().filter_map(Gate::angle).collect();
        assert_eq!(angles, p.values());
    }

    #[test]
    fn gate_validation() {
        assert!(Gate::new(GateKind::Cnot, &[1, 1], None).is_err());
        assert!(Gate::new(GateKind::Rx, &[0], None).is_err());
        assert!(Gate::new(GateKind::X, &[0], Some(Param::Value(1.0))).is_err());
        assert!(Gate::new(GateKind::Cnot, &[0], None).is_err());
        let mut c = Circuit::new(2).unwrap();
        assert!(c.push(Gate::cnot(0, 2)).is_err());
    }

    #[test]
    fn canonical_order_ignores_disjoint_interleaving() {
        let a = Circuit::from_gates(
            2,
            [Gate::rx(0, 0.1), Gate::ry(1, 0.2), Gate::cnot(0, 1)],
        )
        .unwrap();
        let b = Circuit::from_gates(
            2,
            [Gate::ry(1, 0.2), Gate::rx(0, 0.1), Gate::cnot(0, 1)],
        )
        .unwrap();
        assert_eq!(a.canonical_order(), b.canonical_order());
    }

    proptest! {
        #[test]
        fn normalize_is_periodic_and_idempotent(a in -50.0f64..50.0, k in -3i32..=3) {
            let w = normalize_angle(a).unwrap();
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(normalize_angle(w).unwrap(), w);
            let shifted = normalize_angle(a + 2.0 * PI * k as f64).unwrap();
            let d = (shifted - w).abs();
            prop_assert!(d < 1e-12 || (2.0 * PI - d) < 1e-12);
        }

        #[test]
        fn bind_preserves_kinds_and_wires(n in 1usize..5, len in 0usize..30, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut c = Circuit::new(n).unwrap();
            let mut tag = 0;
            for _ in 0..len {
                let q = rng.random_range(0..n);
                if rng.random_bool(0.5) {
                    c.push(Gate::tagged(GateKind::Ry, q, tag)).unwrap();
                    tag += 1;
                } else {
                    c.push(Gate::h(q)).unwrap();
                }
            }
            let p = ParamVector::new((0..tag).map(|i| i as f64 * 0.37).collect()).unwrap();
            let b = c.bind(&p).unwrap();
            prop_assert_eq!(b.len(), c.len());
            for (x, y) in c.gates().iter().zip(b.gates()) {
                prop_assert_eq!(x.kind(), y.kind());
                prop_assert_eq!(x.qubits(), y.qubits());
            }
        }
    }
}
