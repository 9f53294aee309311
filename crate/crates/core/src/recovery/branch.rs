//! Discrete symmetries of a template's forward map.
//!
//! Some templates reach the same unitary from two parameter tuples, e.g.
//! `[rx, ry, rz]` at `(a, b, c)` and `(a + π, π − b, c + π)`. A regressor
//! cannot learn a two-valued inverse, so training targets and brute-force
//! results are mapped to one representative per orbit: the member with the
//! smallest L1 norm after wrapping.

use std::f64::consts::PI;

use crate::circuit::{wrap_angle, GateKind};
use crate::simulator::gate_matrix;
use crate::linalg::Mat2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flip {
    Keep,
    Shift,
    Negate,
    Reflect,
}

impl Flip {
    const ALL: [Flip; 4] = [Flip::Keep, Flip::Shift, Flip::Negate, Flip::Reflect];

    fn apply(self, a: f64) -> f64 {
        wrap_angle(match self {
            Flip::Keep => a,
            Flip::Shift => a + PI,
            Flip::Negate => -a,
            Flip::Reflect => PI - a,
        })
    }
}

const PROBES: [[f64; 3]; 3] = [[0.41, 1.13, 0.77], [2.37, -1.93, 2.71], [-0.59, 0.83, -2.2]];

fn template_unitary(template: &[GateKind], angles: &[f64]) -> Mat2 {
    template
        .iter()
        .zip(angles)
        .fold(Mat2::IDENTITY, |acc, (&k, &a)| gate_matrix(k, Some(a)) * acc)
}

/// Per-coordinate flips that leave the template unitary unchanged up to
/// phase at every probe. The identity is not listed.
pub fn symmetries(template: &[GateKind]) -> Vec<Vec<Flip>> {
    let k = template.len();
    let mut out = Vec::new();
    for code in 1..4usize.pow(k as u32) {
        let flips: Vec<Flip> = (0..k).map(|i| Flip::ALL[(code >> (2 * i)) & 3]).collect();
        let holds = PROBES.iter().all(|p| {
            let a = &p[..k];
            let b: Vec<f64> = a.iter().zip(&flips).map(|(&v, f)| f.apply(v)).collect();
            template_unitary(template, a).phase_distance(&template_unitary(template, &b)) < 1e-10
        });
        if holds {
            out.push(flips);
        }
    }
    out
}

/// Orbit member with the smallest L1 norm; the input wins ties.
pub fn canonicalize(angles: &[f64], syms: &[Vec<Flip>]) -> Vec<f64> {
    let norm = |v: &[f64]| v.iter().map(|a| a.abs()).sum::<f64>();
    let mut best: Vec<f64> = angles.iter().map(|&a| wrap_angle(a)).collect();
    let mut best_norm = norm(&best);
    for flips in syms {
        let cand: Vec<f64> = angles.iter().zip(flips).map(|(&a, f)| f.apply(a)).collect();
        let n = norm(&cand);
        if n < best_norm - 1e-12 {
            best = cand;
            best_norm = n;
        }
    }
    best
}
