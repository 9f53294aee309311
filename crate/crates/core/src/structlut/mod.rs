//! Structure recovery: segment a transpiled circuit wire by wire, undo SWAP
//! routing, and map each segment's gate-kind signature back to the rotation
//! template that produced it.

mod lut;

pub use lut::{build_lut, Lut, LutEntry, LutRecord, PRIORITY};

use std::fmt;
use std::fmt::Write;

use crate::circuit::{serialize, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::simulator::fuse_1q;
use crate::transpiler::decompose_1q;

/// Ordered rotation kinds of one wire's block, e.g. `[RX, RY, RZ]`.
pub type Template = Vec<GateKind>;

pub fn kinds_to_string(kinds: &[GateKind]) -> String {
    if kinds.is_empty() {
        return "-".into();
    }
    kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(",")
}

pub fn kinds_from_str(s: &str) -> Result<Vec<GateKind>> {
    let s = s.trim();
    if s == "-" || s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let t = t.trim().to_ascii_lowercase();
            GateKind::from_name(&t).ok_or_else(|| Error::Format(format!("unknown gate kind `{t}`")))
        })
        .collect()
}

/// Parse a rotation template such as `rx,ry,rz` (also accepts `RX,RY,RZ`).
pub fn parse_template(s: &str) -> Result<Template> {
    let t = kinds_from_str(s)?;
    validate_template(&t)?;
    Ok(t)
}

pub(crate) fn validate_template(t: &[GateKind]) -> Result<()> {
    if t.is_empty() || t.len() > 4 {
        return Err(Error::Precondition(format!(
            "template must have 1 to 4 rotations, got {}",
            t.len()
        )));
    }
    if let Some(k) = t.iter().find(|k| !k.is_rotation()) {
        return Err(Error::Precondition(format!("template contains non-rotation {k}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentSignature(pub Vec<GateKind>);

impl SegmentSignature {
    pub fn kinds(&self) -> &[GateKind] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rz_count(&self) -> usize {
        self.0.iter().filter(|&&k| k == GateKind::Rz).count()
    }
}

impl fmt::Display for SegmentSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&kinds_to_string(&self.0))
    }
}

/// One maximal single-qubit run on a wire.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub wire: usize,
    /// Position among this wire's segments (empty ones included).
    pub index: usize,
    pub signature: SegmentSignature,
    pub rz_angles: Vec<f64>,
    pub gates: Vec<Gate>,
}

impl Segment {
    fn new(wire: usize, index: usize, gates: Vec<Gate>) -> Segment {
        let signature = SegmentSignature(gates.iter().map(|g| g.kind()).collect());
        let rz_angles = gates
            .iter()
            .filter(|g| g.kind() == GateKind::Rz)
            .map(|g| g.angle().expect("bound"))
            .collect();
        Segment {
            wire,
            index,
            signature,
            rz_angles,
            gates,
        }
    }
}

fn require_basis(c: &Circuit) -> Result<()> {
    c.require_bound()?;
    for g in c.gates() {
        if !g.kind().is_basis() {
            return Err(Error::NonBasis {
                gate: g.kind().name().into(),
            });
        }
    }
    Ok(())
}

/// Split every wire at CNOT endpoints. Each wire gets at least one segment.
pub fn segment(c: &Circuit) -> Result<Vec<Vec<Segment>>> {
    require_basis(c)?;
    let n = c.n_qubits();
    let mut out: Vec<Vec<Segment>> = vec![Vec::new(); n];
    let mut cur: Vec<Vec<Gate>> = vec![Vec::new(); n];
    for g in c.gates() {
        if g.kind() == GateKind::Cnot {
            for &q in g.qubits() {
                let idx = out[q].len();
                out[q].push(Segment::new(q, idx, std::mem::take(&mut cur[q])));
            }
        } else {
            cur[g.qubits()[0]].push(*g);
        }
    }
    for q in 0..n {
        let idx = out[q].len();
        out[q].push(Segment::new(q, idx, std::mem::take(&mut cur[q])));
    }
    Ok(out)
}

fn next_on(gates: &[Gate], from: usize, a: usize, b: usize) -> Option<usize> {
    (from..gates.len()).find(|&i| gates[i].acts_on(a) || gates[i].acts_on(b))
}

/// Remove SWAP expansions `cnot a,b; cnot b,a; cnot a,b` (no other gate on
/// `a` or `b` in between) and relabel the rest to logical wires.
///
/// Returns the logical circuit and the final logical→physical layout `p`,
/// so that `unitary(c) = P(p)·unitary(logical)`.
pub fn unroute(c: &Circuit) -> Result<(Circuit, Vec<usize>)> {
    require_basis(c)?;
    let n = c.n_qubits();
    let gates = c.gates();
    // occ[p] = logical qubit currently on physical wire p
    let mut occ: Vec<usize> = (0..n).collect();
    let mut skip = vec![false; gates.len()];
    let mut out = Circuit::new(n)?;
    out.set_phase(c.global_phase())?;
    for i in 0..gates.len() {
        if skip[i] {
            continue;
        }
        let g = gates[i];
        if g.kind() == GateKind::Cnot {
            let (a, b) = (g.qubits()[0], g.qubits()[1]);
            let j = next_on(gates, i + 1, a, b);
            let k = j.and_then(|j| next_on(gates, j + 1, a, b));
            if let (Some(j), Some(k)) = (j, k) {
                let is = |x: usize, c0: usize, t0: usize| {
                    gates[x].kind() == GateKind::Cnot && gates[x].qubits() == [c0, t0]
                };
                if is(j, b, a) && is(k, a, b) {
                    skip[j] = true;
                    skip[k] = true;
                    occ.swap(a, b);
                    continue;
                }
            }
        }
        out.push(g.relabeled(|q| occ[q]))?;
    }
    let mut pos = vec![0; n];
    for (p, &l) in occ.iter().enumerate() {
        pos[l] = p;
    }
    Ok((out, pos))
}

/// A victim segment matched to a LUT template.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMatch {
    /// Logical wire after un-routing.
    pub wire: usize,
    pub wire_index: usize,
    pub template: Template,
    /// Ansatz parameter slots for this template, in template order.
    pub tags: Vec<usize>,
    pub rz_angles: Vec<f64>,
    /// Canonical-triple slot of each RZ angle.
    pub rz_slots: Vec<usize>,
    pub gates: Vec<Gate>,
}

impl SegmentMatch {
    pub fn fused_unitary(&self) -> Result<Mat2> {
        fuse_1q(&self.gates)
    }

    /// Full execution-order ZSX triple of the fused segment; equal to the raw
    /// RZ angles placed in their slots whenever no slot was dropped.
    pub fn canonical_triple(&self) -> Result<[f64; 3]> {
        Ok(decompose_1q(&self.fused_unitary()?)?.slots())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredStructure {
    /// Reverse-engineered ansatz over logical wires, parameters unbound.
    pub ansatz: Circuit,
    pub matches: Vec<SegmentMatch>,
    /// Logical→physical layout undone by `unroute`.
    pub layout: Vec<usize>,
}

impl RecoveredStructure {
    pub fn n_params(&self) -> usize {
        self.matches.iter().map(|m| m.tags.len()).sum()
    }

    /// `(tag, transpiled RZ angles feeding it)` for every parameter slot.
    pub fn transpiled_param_map(&self) -> Vec<(usize, Vec<f64>)> {
        self.matches
            .iter()
            .flat_map(|m| m.tags.iter().map(move |&t| (t, m.rz_angles.clone())))
            .collect()
    }

    /// Stable text form, used for determinism checks and reports.
    pub fn serialize(&self) -> String {
        let mut s = serialize(&self.ansatz);
        writeln!(
            s,
            "# layout {}",
            self.layout.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
        )
        .unwrap();
        for m in &self.matches {
            let angles: Vec<String> = m.rz_angles.iter().map(|a| format!("{a:.16e}")).collect();
            writeln!(
                s,
                "# match wire={} segment={} template={} tags={} slots={} angles={}",
                m.wire,
                m.wire_index,
                kinds_to_string(&m.template),
                m.tags.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","),
                m.rz_slots.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","),
                angles.join(",")
            )
            .unwrap();
        }
        s
    }
}

/// Recover the rotation structure of a transpiled victim.
pub fn recover_structure(victim: &Circuit, lut: &Lut) -> Result<RecoveredStructure> {
    let (logical, layout) = unroute(victim)?;
    let n = logical.n_qubits();
    let mut ansatz = Circuit::new(n)?;
    let mut matches = Vec::new();
    let mut cur: Vec<Vec<Gate>> = vec![Vec::new(); n];
    let mut seg_idx = vec![0usize; n];
    let mut next_tag = 0usize;

    let mut flush = |q: usize,
                     cur: &mut Vec<Vec<Gate>>,
                     ansatz: &mut Circuit,
                     matches: &mut Vec<SegmentMatch>|
     -> Result<()> {
        let gates = std::mem::take(&mut cur[q]);
        let index = seg_idx[q];
        seg_idx[q] += 1;
        if gates.is_empty() {
            return Ok(());
        }
        let seg = Segment::new(q, index, gates);
        let entry = lut.lookup(&seg.signature)?.ok_or_else(|| Error::UnmatchedSegment {
            wire: q,
            position: index,
            signature: seg.signature.to_string(),
        })?;
        let tags: Vec<usize> = (next_tag..next_tag + entry.k).collect();
        next_tag += entry.k;
        for (&kind, &t) in entry.template.iter().zip(&tags) {
            ansatz.push(Gate::tagged(kind, q, t))?;
        }
        matches.push(SegmentMatch {
            wire: q,
            wire_index: index,
            template: entry.template.clone(),
            tags,
            rz_angles: seg.rz_angles,
            rz_slots: entry.rz_slots.clone(),
            gates: seg.gates,
        });
        Ok(())
    };

    for g in logical.gates() {
        if g.kind() == GateKind::Cnot {
            for &q in g.qubits() {
                flush(q, &mut cur, &mut ansatz, &mut matches)?;
            }
            ansatz.push(*g)?;
        } else {
            cur[g.qubits()[0]].push(*g);
        }
    }
    for q in 0..n {
        flush(q, &mut cur, &mut ansatz, &mut matches)?;
    }
    Ok(RecoveredStructure {
        ansatz,
        matches,
        layout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{permutation_unitary, unitary_of};
    use crate::transpiler::{route, transpile, CouplingMap, TranspileOptions};
    use rand::{Rng, SeedableRng};
    use GateKind::*;

    #[test]
    fn segment_examples() {
        let c = Circuit::from_gates(2, [Gate::rz(0, 0.3), Gate::cnot(0, 1), Gate::sx(0)]).unwrap();
        let s = segment(&c).unwrap();
        assert_eq!(s[0].len(), 2);
        assert_eq!(s[0][0].signature.0, vec![Rz]);
        assert_eq!(s[0][0].rz_angles, vec![0.3]);
        assert_eq!(s[0][1].signature.0, vec![Sx]);
        assert!(s[0][1].rz_angles.is_empty());

        let empty = Circuit::new(3).unwrap();
        let s = segment(&empty).unwrap();
        assert!(s.iter().all(|w| w.len() == 1 && w[0].signature.is_empty()));

        let h = Circuit::from_gates(1, [Gate::h(0)]).unwrap();
        assert!(matches!(segment(&h), Err(Error::NonBasis { .. })));
    }

    #[test]
    fn segment_of_transpiled_template() {
        let c = Circuit::from_gates(1, [Gate::rx(0, 0.4), Gate::ry(0, 1.1), Gate::rz(0, -0.9)])
            .unwrap();
        let t = transpile(&c, &TranspileOptions::linear(1, 1)).unwrap();
        let s = segment(&t.circuit).unwrap();
        assert_eq!(s[0][0].signature.0, vec![Rz, Sx, Rz, Sx, Rz]);
        assert_eq!(s[0][0].rz_angles.len(), 3);
    }

    #[test]
    fn unroute_examples() {
        let swap = Circuit::from_gates(2, [Gate::cnot(0, 1), Gate::cnot(1, 0), Gate::cnot(0, 1)])
            .unwrap();
        let (c, p) = unroute(&swap).unwrap();
        assert!(c.is_empty());
        assert_eq!(p, vec![1, 0]);

        let plain = Circuit::from_gates(2, [Gate::rz(0, 0.1), Gate::sx(1)]).unwrap();
        let (c, p) = unroute(&plain).unwrap();
        assert_eq!(c, plain);
        assert_eq!(p, vec![0, 1]);

        let long = Circuit::from_gates(3, [Gate::cnot(0, 2)]).unwrap();
        let routed = route(&long, &CouplingMap::linear(3)).unwrap();
        let (c, p) = unroute(&routed.circuit).unwrap();
        assert_eq!(c, long);
        assert_eq!(p, routed.final_layout);
    }

    #[test]
    fn unroute_round_trips_all_pairs() {
        for n in 2..=8 {
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let c = Circuit::from_gates(n, [Gate::cnot(a, b)]).unwrap();
                    let r = route(&c, &CouplingMap::linear(n)).unwrap();
                    let (back, p) = unroute(&r.circuit).unwrap();
                    assert_eq!(back, c, "n={n} a={a} b={b}");
                    assert_eq!(p, r.final_layout);
                }
            }
        }
    }

    #[test]
    fn unroute_preserves_unitary_up_to_layout() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..40 {
            let n = rng.random_range(2..=4);
            let mut c = Circuit::new(n).unwrap();
            for _ in 0..12 {
                let a = rng.random_range(0..n);
                let mut b = rng.random_range(0..n);
                while b == a {
                    b = rng.random_range(0..n);
                }
                c.push(Gate::ry(a, rng.random_range(-3.0..3.0))).unwrap();
                c.push(Gate::cnot(a, b)).unwrap();
            }
            let t = transpile(&c, &TranspileOptions::linear(n, 1)).unwrap();
            let (logical, p) = unroute(&t.circuit).unwrap();
            let lhs = unitary_of(&t.circuit).unwrap();
            let rhs = permutation_unitary(&p).matmul(&unitary_of(&logical).unwrap());
            assert!(lhs.max_abs_diff(&rhs) < 1e-9);
        }
    }

    #[test]
    fn template_strings() {
        assert_eq!(parse_template("RX,ry,Rz").unwrap(), vec![Rx, Ry, Rz]);
        assert!(parse_template("rx,sx").is_err());
        assert!(parse_template("").is_err());
        assert!(parse_template("rx,rx,rx,rx,rx").is_err());
        assert_eq!(kinds_to_string(&[]), "-");
    }
}
