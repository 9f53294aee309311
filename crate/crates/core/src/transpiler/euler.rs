//! Single-qubit synthesis into the `rz·sx·rz·sx·rz` pattern.

use std::f64::consts::PI;

use crate::circuit::{wrap_angle, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64};
use crate::simulator::{gate_matrix, phase_factor};

const UNITARY_TOL: f64 = 1e-9;

/// ZSX angles: `U = e^{iγ}·RZ(a)·SX·RZ(b)·SX·RZ(c)` (c executes first).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZsxAngles {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
}

impl ZsxAngles {
    /// Angles in execution order, which is also the slot order used by the
    /// structure and parameter recovery stages: `[c, b, a]`.
    pub fn slots(&self) -> [f64; 3] {
        [self.c, self.b, self.a]
    }

    pub fn recompose(&self) -> Mat2 {
        zsx_product(self.a, self.b, self.c).scale(phase_factor(self.gamma))
    }
}

/// ZYZ Euler angles: `U ∝ RZ(phi)·RY(theta)·RZ(lam)`, `theta ∈ [0, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZyzAngles {
    pub theta: f64,
    pub phi: f64,
    pub lam: f64,
}

/// Phaseless `RZ(a)·SX·RZ(b)·SX·RZ(c)`.
pub fn zsx_product(a: f64, b: f64, c: f64) -> Mat2 {
    let sx = gate_matrix(GateKind::Sx, None);
    gate_matrix(GateKind::Rz, Some(a))
        * sx
        * gate_matrix(GateKind::Rz, Some(b))
        * sx
        * gate_matrix(GateKind::Rz, Some(c))
}

fn check_unitary(u: &Mat2) -> Result<()> {
    let err = u.unitarity_error();
    if err.is_finite() && err <= UNITARY_TOL {
        Ok(())
    } else {
        Err(Error::NotUnitary(err))
    }
}

pub fn zyz_angles(u: &Mat2) -> Result<ZyzAngles> {
    check_unitary(u)?;
    let coeff = u.det().sqrt().inv();
    let su = u.scale(coeff);
    let theta = 2.0 * su.0[1][0].norm().atan2(su.0[0][0].norm());
    let ppl = su.0[1][1].arg();
    let pml = su.0[1][0].arg();
    Ok(ZyzAngles {
        theta,
        phi: wrap_angle(ppl + pml),
        lam: wrap_angle(ppl - pml),
    })
}

/// Global phase making `e^{iγ}·v` closest to `u`.
pub(crate) fn residual_phase(u: &Mat2, v: &Mat2) -> f64 {
    let t: C64 = (v.dagger() * *u).trace();
    if t.norm() == 0.0 {
        0.0
    } else {
        t.arg()
    }
}

/// Exact ZSX decomposition of a 2×2 unitary.
///
/// The ZYZ branch is fixed (`theta ∈ [0, π]`), then `a = φ+π`, `b = θ+π`,
/// `c = λ`, so unitaries equal up to phase always give equal angles.
pub fn decompose_1q(u: &Mat2) -> Result<ZsxAngles> {
    let z = zyz_angles(u)?;
    let a = wrap_angle(z.phi + PI);
    let b = wrap_angle(z.theta + PI);
    let c = wrap_angle(z.lam);
    let gamma = wrap_angle(residual_phase(u, &zsx_product(a, b, c)));
    Ok(ZsxAngles { a, b, c, gamma })
}

/// One emitted gate plus its provenance. `slot` is the index of an RZ in
/// the canonical execution-order triple `[c, b, a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthGate {
    pub kind: GateKind,
    pub angle: Option<f64>,
    pub slot: Option<usize>,
}

impl SynthGate {
    fn rz(angle: f64, slot: usize) -> SynthGate {
        SynthGate {
            kind: GateKind::Rz,
            angle: Some(angle),
            slot: Some(slot),
        }
    }

    fn sx() -> SynthGate {
        SynthGate {
            kind: GateKind::Sx,
            angle: None,
            slot: None,
        }
    }
}

/// Synthesized single-qubit run: gates in execution order and the phase
/// such that `e^{i·phase}·Π gates == U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub gates: Vec<SynthGate>,
    pub phase: f64,
}

impl Synthesis {
    pub fn matrix(&self) -> Mat2 {
        let mut m = Mat2::IDENTITY;
        for g in &self.gates {
            m = gate_matrix(g.kind, g.angle) * m;
        }
        m.scale(phase_factor(self.phase))
    }
}

/// Lower a fused single-qubit unitary. Level 0 always yields the full
/// five-gate pattern; level 1 collapses diagonal unitaries to one RZ and
/// drops RZ gates within `zero_tol` of zero.
pub fn synthesize_1q(u: &Mat2, level: u8, zero_tol: f64) -> Result<Synthesis> {
    let z = zyz_angles(u)?;
    let gates = if level >= 1 && z.theta <= zero_tol {
        let delta = wrap_angle(u.0[1][1].arg() - u.0[0][0].arg());
        if delta.abs() <= zero_tol {
            Vec::new()
        } else {
            vec![SynthGate::rz(delta, 0)]
        }
    } else {
        let zsx = decompose_1q(u)?;
        let full = [
            SynthGate::rz(zsx.c, 0),
            SynthGate::sx(),
            SynthGate::rz(zsx.b, 1),
            SynthGate::sx(),
            SynthGate::rz(zsx.a, 2),
        ];
        if level >= 1 {
            full.into_iter()
                .filter(|g| g.kind != GateKind::Rz || g.angle.unwrap().abs() > zero_tol)
                .collect()
        } else {
            full.to_vec()
        }
    };
    let mut s = Synthesis { gates, phase: 0.0 };
    s.phase = wrap_angle(residual_phase(u, &s.matrix()));
    Ok(s)
}
