//! Peephole passes over bound circuits.

use std::f64::consts::PI;

use crate::circuit::{wrap_angle, wrap_with_turns, Circuit, Gate, GateKind};
use crate::error::Result;
use crate::linalg::Mat2;
use crate::simulator::gate_unitary_1q;

use super::euler::synthesize_1q;

/// Fuse each maximal single-qubit run per wire into one unitary and
/// re-synthesize it at `level`. Runs end at any two-qubit gate touching the
/// wire; empty runs emit nothing.
pub fn fuse_1q_runs(c: &Circuit, level: u8, zero_tol: f64) -> Result<Circuit> {
    c.require_bound()?;
    let n = c.n_qubits();
    let mut out = Circuit::new(n)?;
    out.set_phase(c.global_phase())?;
    let mut pending: Vec<Option<Mat2>> = vec![None; n];

    let flush = |out: &mut Circuit, q: usize, pending: &mut Vec<Option<Mat2>>| -> Result<()> {
        if let Some(u) = pending[q].take() {
            let s = synthesize_1q(&u, level, zero_tol)?;
            for g in s.gates {
                out.push(match g.angle {
                    Some(a) => Gate::rotation(g.kind, q, a),
                    None => Gate::new(g.kind, &[q], None)?,
                })?;
            }
            out.add_phase(s.phase);
        }
        Ok(())
    };

    for g in c.gates() {
        if g.kind().arity() == 1 {
            let q = g.qubits()[0];
            let m = gate_unitary_1q(g)?;
            pending[q] = Some(m * pending[q].unwrap_or(Mat2::IDENTITY));
        } else {
            for &q in g.qubits() {
                flush(&mut out, q, &mut pending)?;
            }
            out.push(*g)?;
        }
    }
    for q in 0..n {
        flush(&mut out, q, &mut pending)?;
    }
    Ok(out)
}

/// Merge RZ gates that are adjacent on their wire.
pub fn merge_rz(c: &Circuit) -> Result<Circuit> {
    c.require_bound()?;
    let mut out = Circuit::new(c.n_qubits())?;
    out.set_phase(c.global_phase())?;
    // Index in `out` of the last gate on each wire.
    let mut last: Vec<Option<usize>> = vec![None; c.n_qubits()];
    for g in c.gates() {
        if g.kind() == GateKind::Rz {
            let q = g.qubits()[0];
            if let Some(i) = last[q] {
                let prev = out.gates()[i];
                if prev.kind() == GateKind::Rz {
                    let (wrapped, turns) =
                        wrap_with_turns(prev.angle().unwrap() + g.angle().unwrap());
                    if turns % 2 != 0 {
                        out.add_phase(PI);
                    }
                    out.gates_mut()[i] = Gate::rz(q, wrapped);
                    continue;
                }
            }
        }
        out.push(*g)?;
        let i = out.len() - 1;
        for &q in g.qubits() {
            last[q] = Some(i);
        }
    }
    Ok(out)
}

/// Remove ID gates and rotations within `zero_tol` of zero (mod 2π).
pub fn drop_identity(c: &Circuit, zero_tol: f64) -> Result<Circuit> {
    c.require_bound()?;
    let mut out = Circuit::new(c.n_qubits())?;
    out.set_phase(c.global_phase())?;
    for g in c.gates() {
        let trivial = match g.kind() {
            GateKind::Id => true,
            k if k.is_rotation() => wrap_angle(g.angle().unwrap()).abs() <= zero_tol,
            _ => false,
        };
        if !trivial {
            out.push(*g)?;
        }
    }
    Ok(out)
}

/// Level-1 peephole optimization: `merge_rz` and `drop_identity` to a
/// fixpoint.
pub fn optimize(c: &Circuit, zero_tol: f64) -> Result<Circuit> {
    let mut cur = drop_identity(&merge_rz(c)?, zero_tol)?;
    loop {
        let next = drop_identity(&merge_rz(&cur)?, zero_tol)?;
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
}
