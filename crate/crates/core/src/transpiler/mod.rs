//! Lowering to the `{id, x, sx, rz, cnot}` basis on a coupling map.
//!
//! Pipeline: expand SWAPs, route with the trivial initial layout, fuse every
//! single-qubit run and re-synthesize it as `rz·sx·rz·sx·rz`, then (level 1)
//! shorten patterns and run the peephole passes to a fixpoint.

mod euler;
mod passes;
mod routing;

pub use euler::{
    decompose_1q, synthesize_1q, zsx_product, zyz_angles, SynthGate, Synthesis, ZsxAngles,
    ZyzAngles,
};
pub use passes::{drop_identity, fuse_1q_runs, merge_rz, optimize};
pub use routing::{route, CouplingMap, Routed};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::simulator::{permutation_unitary, unitary_of};

pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranspileOptions {
    pub optimization_level: u8,
    pub coupling: CouplingMap,
    pub zero_tol: f64,
}

impl TranspileOptions {
    pub fn new(optimization_level: u8, coupling: CouplingMap, zero_tol: f64) -> Result<Self> {
        let opts = TranspileOptions {
            optimization_level,
            coupling,
            zero_tol,
        };
        opts.validate()?;
        Ok(opts)
    }

    /// Linear coupling over `n` qubits, default tolerance.
    pub fn linear(n: usize, optimization_level: u8) -> Self {
        TranspileOptions {
            optimization_level,
            coupling: CouplingMap::linear(n),
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.optimization_level > 1 {
            return Err(Error::Unsupported(format!(
                "optimization level {} (only 0 and 1 are modeled)",
                self.optimization_level
            )));
        }
        if !(self.zero_tol > 0.0 && self.zero_tol.is_finite()) {
            return Err(Error::Precondition(format!(
                "zero_tol must be positive, got {}",
                self.zero_tol
            )));
        }
        Ok(())
    }

    /// Same options on a different coupling width (linear maps only keep
    /// their shape; explicit edge lists are kept as given).
    pub fn with_width(&self, n: usize) -> Self {
        let coupling = if self.coupling == CouplingMap::linear(self.coupling.n_physical()) {
            CouplingMap::linear(n)
        } else {
            self.coupling.clone()
        };
        TranspileOptions {
            coupling,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranspileResult {
    pub circuit: Circuit,
    /// Initial logical→physical placement (always trivial here).
    pub layout: Vec<usize>,
    /// Logical→physical placement after routing.
    pub final_layout: Vec<usize>,
}

impl TranspileResult {
    /// Max-abs entry deviation between the transpiled unitary and the
    /// original one permuted by the final layout, global phase included.
    pub fn equivalence_error(&self, original: &Circuit) -> Result<f64> {
        let wide = original.widened(self.circuit.n_qubits())?;
        let want = permutation_unitary(&self.final_layout).matmul(&unitary_of(&wide)?);
        Ok(unitary_of(&self.circuit)?.max_abs_diff(&want))
    }
}

fn expand_swaps(c: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(c.n_qubits())?;
    out.set_phase(c.global_phase())?;
    for g in c.gates() {
        if g.kind() == GateKind::Swap {
            let (a, b) = (g.qubits()[0], g.qubits()[1]);
            out.extend([Gate::cnot(a, b), Gate::cnot(b, a), Gate::cnot(a, b)])?;
        } else {
            out.push(*g)?;
        }
    }
    Ok(out)
}

pub fn transpile(c: &Circuit, opts: &TranspileOptions) -> Result<TranspileResult> {
    opts.validate()?;
    c.require_bound()?;
    let routed = route(&expand_swaps(c)?, &opts.coupling)?;
    let mut out = fuse_1q_runs(&routed.circuit, opts.optimization_level, opts.zero_tol)?;
    if opts.optimization_level >= 1 {
        out = optimize(&out, opts.zero_tol)?;
    }
    Ok(TranspileResult {
        circuit: out,
        layout: (0..opts.coupling.n_physical()).collect(),
        final_layout: routed.final_layout,
    })
}

/// Check that every gate is a basis gate and every CNOT is coupled.
pub fn check_basis(c: &Circuit, coupling: &CouplingMap) -> Result<()> {
    for g in c.gates() {
        if !g.kind().is_basis() {
            return Err(Error::NonBasis {
                gate: g.kind().name().into(),
            });
        }
        if g.kind() == GateKind::Cnot && !coupling.is_coupled(g.qubits()[0], g.qubits()[1]) {
            return Err(Error::Coupling(format!(
                "cnot q{}, q{} is not on a coupled pair",
                g.qubits()[0],
                g.qubits()[1]
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::equiv_up_to_phase;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn kinds(c: &Circuit) -> Vec<GateKind> {
        c.gates().iter().map(|g| g.kind()).collect()
    }

    fn random_circuit(rng: &mut impl Rng, n: usize, len: usize) -> Circuit {
        let mut c = Circuit::new(n).unwrap();
        for _ in 0..len {
            let q = rng.random_range(0..n);
            let g = match rng.random_range(0..9) {
                0 => Gate::rx(q, rng.random_range(-PI..PI)),
                1 => Gate::ry(q, rng.random_range(-PI..PI)),
                2 => Gate::rz(q, rng.random_range(-4.0..4.0)),
                3 => Gate::sx(q),
                4 => Gate::x(q),
                5 => Gate::h(q),
                6 => Gate::id(q),
                _ if n > 1 => {
                    let mut t = rng.random_range(0..n);
                    while t == q {
                        t = rng.random_range(0..n);
                    }
                    if rng.random_bool(0.85) {
                        Gate::cnot(q, t)
                    } else {
                        Gate::swap(q, t)
                    }
                }
                _ => Gate::rz(q, 0.3),
            };
            c.push(g).unwrap();
        }
        c
    }

    #[test]
    fn rotation_template_level1_shape() {
        let c = Circuit::from_gates(1, [Gate::rx(0, 0.4), Gate::ry(0, 1.1), Gate::rz(0, -0.9)])
            .unwrap();
        let r = transpile(&c, &TranspileOptions::linear(1, 1)).unwrap();
        use GateKind::*;
        assert_eq!(kinds(&r.circuit), vec![Rz, Sx, Rz, Sx, Rz]);
        assert!(r.equivalence_error(&c).unwrap() < 1e-9);
    }

    #[test]
    fn basis_rz_passes_through() {
        let c = Circuit::from_gates(1, [Gate::rz(0, 0.7)]).unwrap();
        let r = transpile(&c, &TranspileOptions::linear(1, 1)).unwrap();
        assert_eq!(r.circuit.len(), 1);
        assert!((r.circuit.gates()[0].angle().unwrap() - 0.7).abs() < 1e-12);
        assert!(r.circuit.global_phase().abs() < 1e-12);
    }

    #[test]
    fn long_range_cnot_is_routed() {
        let c = Circuit::from_gates(3, [Gate::h(0), Gate::cnot(0, 2)]).unwrap();
        let r = transpile(&c, &TranspileOptions::linear(3, 1)).unwrap();
        let cnots: Vec<_> = r
            .circuit
            .gates()
            .iter()
            .filter(|g| g.kind() == GateKind::Cnot)
            .map(|g| (g.qubits()[0], g.qubits()[1]))
            .collect();
        assert_eq!(cnots, vec![(0, 1), (1, 0), (0, 1), (1, 2)]);
        assert_eq!(r.final_layout, vec![1, 0, 2]);
        check_basis(&r.circuit, &CouplingMap::linear(3)).unwrap();
        let want = permutation_unitary(&r.final_layout).matmul(&unitary_of(&c).unwrap());
        assert!(equiv_up_to_phase(&unitary_of(&r.circuit).unwrap(), &want, 1e-9).unwrap());
        assert!(r.equivalence_error(&c).unwrap() < 1e-9);
    }

    #[test]
    fn route_examples() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let r = route(&c, &CouplingMap::linear(2)).unwrap();
        assert_eq!(r.circuit, c);
        assert_eq!(r.final_layout, vec![0, 1]);

        let c = Circuit::from_gates(3, [Gate::rx(2, 0.5), Gate::sx(0)]).unwrap();
        let r = route(&c, &CouplingMap::linear(3)).unwrap();
        assert_eq!(r.circuit, c);
        assert_eq!(r.final_layout, vec![0, 1, 2]);

        let broken = CouplingMap::from_edges(3, &[(0, 1)]).unwrap();
        assert!(matches!(route(&c, &broken), Err(Error::Coupling(_))));
    }

    #[test]
    fn width_and_option_errors() {
        let c = Circuit::new(3).unwrap();
        assert!(transpile(&c, &TranspileOptions::linear(2, 0)).is_err());
        assert!(TranspileOptions::new(2, CouplingMap::linear(2), 1e-9).is_err());
        assert!(TranspileOptions::new(1, CouplingMap::linear(2), 0.0).is_err());
        assert!(CouplingMap::from_edges(2, &[(0, 2)]).is_err());
        let tagged = Circuit::from_gates(1, [Gate::tagged(GateKind::Rz, 0, 0)]).unwrap();
        assert!(matches!(
            transpile(&tagged, &TranspileOptions::linear(1, 1)),
            Err(Error::Unbound(0))
        ));
    }

    #[test]
    fn merge_rz_examples() {
        let c = Circuit::from_gates(1, [Gate::rz(0, 1.0), Gate::rz(0, 2.5)]).unwrap();
        let m = merge_rz(&c).unwrap();
        assert_eq!(m.len(), 1);
        assert!(
            unitary_of(&m).unwrap().max_abs_diff(&unitary_of(&c).unwrap()) < 1e-9,
            "merged unitary differs"
        );

        let c = Circuit::from_gates(1, [Gate::rz(0, PI), Gate::rz(0, PI)]).unwrap();
        let o = optimize(&c, 1e-9).unwrap();
        assert!(o.is_empty());
        // RZ(2π) = −I, carried entirely by the phase.
        assert!(unitary_of(&o).unwrap().max_abs_diff(&unitary_of(&c).unwrap()) < 1e-9);
    }

    #[test]
    fn x_pair_vanishes_at_level1() {
        let c = Circuit::from_gates(1, [Gate::x(0), Gate::x(0)]).unwrap();
        let r = transpile(&c, &TranspileOptions::linear(1, 1)).unwrap();
        assert!(r.circuit.is_empty());
        assert!(r.equivalence_error(&c).unwrap() < 1e-9);
    }

    #[test]
    fn drop_identity_removes_ids() {
        let c = Circuit::from_gates(2, [Gate::id(0), Gate::rx(1, 0.0), Gate::sx(1)]).unwrap();
        assert_eq!(kinds(&drop_identity(&c, 1e-9).unwrap()), vec![GateKind::Sx]);
    }

    #[test]
    fn random_circuits_preserve_semantics() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..150 {
            let n = rng.random_range(1..=4);
            let len = rng.random_range(0..=40);
            let c = random_circuit(&mut rng, n, len);
            for level in [0, 1] {
                let opts = TranspileOptions::linear(n, level);
                let r = transpile(&c, &opts).unwrap();
                check_basis(&r.circuit, &opts.coupling).unwrap();
                let err = r.equivalence_error(&c).unwrap();
                assert!(err < 1e-9, "level {level}: error {err:e}\n{c}");
                if level == 0 {
                    assert_level0_shape(&r.circuit);
                } else {
                    let again = optimize(&r.circuit, opts.zero_tol).unwrap();
                    assert_eq!(again, r.circuit);
                    assert!(r.circuit.gates().iter().all(|g| g.kind() != GateKind::Id));
                }
            }
        }
    }

    fn assert_level0_shape(c: &Circuit) {
        let mut run = vec![Vec::new(); c.n_qubits()];
        let check = |r: &mut Vec<GateKind>| {
            if !r.is_empty() {
                use GateKind::*;
                assert_eq!(*r, vec![Rz, Sx, Rz, Sx, Rz]);
            }
            r.clear();
        };
        for g in c.gates() {
            if g.kind() == GateKind::Cnot {
                for &q in g.qubits() {
                    check(&mut run[q]);
                }
            } else {
                run[g.qubits()[0]].push(g.kind());
            }
        }
        for r in &mut run {
            check(r);
        }
    }

    #[test]
    fn wider_coupling_than_circuit() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1), Gate::ry(1, 0.2)]).unwrap();
        let r = transpile(&c, &TranspileOptions::linear(4, 1)).unwrap();
        assert_eq!(r.circuit.n_qubits(), 4);
        assert!(r.equivalence_error(&c).unwrap() < 1e-9);
    }
}
