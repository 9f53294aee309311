use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::branch::{canonicalize, symmetries};
use super::dataset::{grid_tuple, grid_values};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::simulator::fuse_1q;
use crate::structlut::{segment, unroute, RecoveredStructure, SegmentMatch};
use crate::transpiler::{transpile, TranspileOptions};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BfStats {
    pub candidates_evaluated: usize,
    pub segments: usize,
    pub seconds: f64,
    pub per_segment_seconds: Vec<f64>,
}

/// Transpile the recovered ansatz with `candidate` on one segment (every
/// other slot at zero) and read back that segment's fused unitary.
fn candidate_unitary(
    structure: &RecoveredStructure,
    m: &SegmentMatch,
    candidate: &[f64],
    opts: &TranspileOptions,
) -> Result<Mat2> {
    let mut values = vec![0.0; structure.n_params()];
    for (&t, &v) in m.tags.iter().zip(candidate) {
        values[t] = v;
    }
    let bound = structure.ansatz.bind_values(&values)?;
    let out = transpile(&bound, opts)?.circuit;
    let (logical, _) = unroute(&out)?;
    let segs = segment(&logical)?;
    let seg = segs
        .get(m.wire)
        .and_then(|w| w.get(m.wire_index))
        .ok_or_else(|| Error::StructureMismatch(format!(
            "candidate circuit lacks segment {} on wire {}",
            m.wire_index, m.wire
        )))?;
    fuse_1q(&seg.gates)
}

/// Per-segment exhaustive grid search scored by `2 − |tr(U†V)|` against the
/// victim segment. The first minimum in grid order wins, then the tuple is
/// mapped to its orbit representative.
pub fn recover_params_bf(
    structure: &RecoveredStructure,
    opts: &TranspileOptions,
    step: f64,
) -> Result<(Vec<f64>, BfStats)> {
    let values = grid_values(step)?;
    let opts = opts.with_width(structure.ansatz.n_qubits());
    let mut out = vec![0.0; structure.n_params()];
    let mut stats = BfStats::default();
    let start = Instant::now();
    for m in &structure.matches {
        let t0 = Instant::now();
        let k = m.tags.len();
        let target = m.fused_unitary()?;
        let total = values.len().pow(k as u32);
        let scores: Vec<f64> = (0..total)
            .into_par_iter()
            .map(|i| {
                let cand = grid_tuple(&values, k, i);
                Ok(target.phase_distance(&candidate_unitary(structure, m, &cand, &opts)?))
            })
            .collect::<Result<_>>()?;
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s < scores[best] {
                best = i;
            }
        }
        let tuple = canonicalize(&grid_tuple(&values, k, best), &symmetries(&m.template));
        for (&t, v) in m.tags.iter().zip(tuple) {
            out[t] = v;
        }
        stats.candidates_evaluated += total;
        stats.segments += 1;
        stats.per_segment_seconds.push(t0.elapsed().as_secs_f64());
    }
    stats.seconds = start.elapsed().as_secs_f64();
    Ok((out, stats))
}
