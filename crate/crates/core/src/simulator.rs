//! Dense statevector simulation.
//!
//! Qubit ordering is little-endian everywhere: qubit `q` is bit `q` of the
//! basis-state index, so `|01⟩` written as index 1 has qubit 0 set.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, UnitaryMatrix, C64, I, ONE, ZERO};

pub const MAX_RUN_QUBITS: usize = 20;
pub const MAX_UNITARY_QUBITS: usize = 10;

const NORM_TOL: f64 = 1e-9;

/// 2×2 matrix of a single-qubit gate.
pub fn gate_matrix(kind: GateKind, angle: Option<f64>) -> Mat2 {
    let half = angle.unwrap_or(0.0) / 2.0;
    let (s, c) = half.sin_cos();
    match kind {
        GateKind::Rx => Mat2::new(C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)),
        GateKind::Ry => Mat2::new(C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)),
        GateKind::Rz => Mat2::new(C64::new(c, -s), ZERO, ZERO, C64::new(c, s)),
        GateKind::X => Mat2::new(ZERO, ONE, ONE, ZERO),
        GateKind::Sx => {
            let p = C64::new(0.5, 0.5);
            let m = C64::new(0.5, -0.5);
            Mat2::new(p, m, m, p)
        }
        GateKind::Id => Mat2::IDENTITY,
        GateKind::H => {
            let h = C64::new(FRAC_1_SQRT_2, 0.0);
            Mat2::new(h, h, h, -h)
        }
        GateKind::Cnot | GateKind::Swap => panic!("{kind} is not a single-qubit gate"),
    }
}

/// Matrix of a bound single-qubit gate.
pub fn gate_unitary_1q(g: &Gate) -> Result<Mat2> {
    if g.kind().arity() != 1 {
        return Err(Error::InvalidGate(format!("{} is not single-qubit", g.kind())));
    }
    if let Some(t) = g.tag() {
        return Err(Error::Unbound(t));
    }
    Ok(gate_matrix(g.kind(), g.angle()))
}

/// Product of single-qubit gates in execution order (first gate rightmost).
pub fn fuse_1q(gates: &[Gate]) -> Result<Mat2> {
    let mut u = Mat2::IDENTITY;
    for g in gates {
        u = gate_unitary_1q(g)? * u;
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// |0…0⟩ on `n_qubits`.
    pub fn zero(n_qubits: usize) -> Statevector {
        Statevector::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Statevector {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Statevector { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Statevector> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Dimension {
                expected: dim.next_power_of_two().max(1),
                got: dim,
            });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Precondition(format!("state norm² {norm} is not 1")));
        }
        Ok(Statevector {
            n_qubits: dim.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let bit = 1usize << q;
        let [[a, b], [c, d]] = m.0;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let x0 = self.amps[i];
                let x1 = self.amps[j];
                self.amps[i] = a * x0 + b * x1;
                self.amps[j] = c * x0 + d * x1;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let cb = 1usize << control;
        let tb = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) {
        let ab = 1usize << a;
        let bb = 1usize << b;
        for i in 0..self.amps.len() {
            if i & ab != 0 && i & bb == 0 {
                self.amps.swap(i, (i & !ab) | bb);
            }
        }
    }

    fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        match g.kind() {
            GateKind::Cnot => self.apply_cnot(g.qubits()[0], g.qubits()[1]),
            GateKind::Swap => self.apply_swap(g.qubits()[0], g.qubits()[1]),
            GateKind::Id => {}
            _ => {
                let m = gate_unitary_1q(g)?;
                self.apply_1q(g.qubits()[0], &m);
            }
        }
        Ok(())
    }

    /// ⟨ψ|Z_q|ψ⟩.
    pub fn expval_z(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    pub(crate) fn scale(&mut self, s: C64) {
        for a in &mut self.amps {
            *a *= s;
        }
    }
}

/// Apply `c` (including its global phase) to `init`.
pub fn run(c: &Circuit, init: &Statevector) -> Result<Statevector> {
    if c.n_qubits() > MAX_RUN_QUBITS {
        return Err(Error::Resource(format!(
            "{} qubits exceeds the statevector cap of {MAX_RUN_QUBITS}",
            c.n_qubits()
        )));
    }
    if init.n_qubits() != c.n_qubits() {
        return Err(Error::Dimension {
            expected: c.n_qubits(),
            got: init.n_qubits(),
        });
    }
    c.require_bound()?;
    let mut state = init.clone();
    for g in c.gates() {
        state.apply_gate(g)?;
    }
    if c.global_phase() != 0.0 {
        state.scale(C64::from_polar(1.0, c.global_phase()));
    }
    Ok(state)
}

/// Full unitary of `c`; column j is `run(c, |j⟩)`.
pub fn unitary_of(c: &Circuit) -> Result<UnitaryMatrix> {
    let n = c.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::Resource(format!(
            "{n} qubits exceeds the unitary cap of {MAX_UNITARY_QUBITS}"
        )));
    }
    c.require_bound()?;
    let dim = 1usize << n;
    let mut u = UnitaryMatrix::zeros(dim);
    for j in 0..dim {
        let col = run(c, &Statevector::basis(n, j))?;
        for (r, a) in col.amplitudes().iter().enumerate() {
            u.set(r, j, *a);
        }
    }
    Ok(u)
}

pub fn expval_z(c: &Circuit, qubit: usize, init: &Statevector) -> Result<f64> {
    if qubit >= c.n_qubits() {
        return Err(Error::InvalidGate(format!("qubit q{qubit} out of range")));
    }
    Ok(run(c, init)?.expval_z(qubit))
}

/// `| |tr(U†V)| − dim | ≤ tol·dim`.
pub fn equiv_up_to_phase(u: &UnitaryMatrix, v: &UnitaryMatrix, tol: f64) -> Result<bool> {
    if u.dim() != v.dim() {
        return Err(Error::Dimension {
            expected: u.dim(),
            got: v.dim(),
        });
    }
    let dim = u.dim() as f64;
    let tr = u.dagger().matmul(v).trace();
    Ok((tr.norm() - dim).abs() <= tol * dim)
}

/// Permutation operator moving logical qubit `i` onto wire `perm[i]`.
pub fn permutation_unitary(perm: &[usize]) -> UnitaryMatrix {
    let n = perm.len();
    let dim = 1usize << n;
    let mut u = UnitaryMatrix::zeros(dim);
    for x in 0..dim {
        let mut y = 0;
        for (i, &p) in perm.iter().enumerate() {
            if x >> i & 1 == 1 {
                y |= 1 << p;
            }
        }
        u.set(y, x, ONE);
    }
    u
}

/// e^{iφ}.
pub fn phase_factor(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

#[allow(dead_code)]
pub(crate) const IMAG: C64 = I;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    /// Independent oracle: kron-expand every gate to 2^n×2^n and multiply.
    fn dense_gate(n: usize, g: &Gate) -> UnitaryMatrix {
        let dim = 1usize << n;
        let mut u = UnitaryMatrix::zeros(dim);
        match g.kind() {
            GateKind::Cnot | GateKind::Swap => {
                let (a, b) = (g.qubits()[0], g.qubits()[1]);
                for x in 0..dim {
                    let (ba, bb) = (x >> a & 1, x >> b & 1);
                    let y = if g.kind() == GateKind::Cnot {
                        if ba == 1 { x ^ (1 << b) } else { x }
                    } else {
                        (x & !(1 << a) & !(1 << b)) | (bb << a) | (ba << b)
                    };
                    u.set(y, x, ONE);
                }
            }
            _ => {
                let m = gate_matrix(g.kind(), g.angle());
                let q = g.qubits()[0];
                for r in 0..dim {
                    for c in 0..dim {
                        if (r & !(1 << q)) != (c & !(1 << q)) {
                            continue;
                        }
                        u.set(r, c, m.0[r >> q & 1][c >> q & 1]);
                    }
                }
            }
        }
        u
    }

    fn dense_oracle(c: &Circuit) -> UnitaryMatrix {
        let mut u = UnitaryMatrix::identity(1 << c.n_qubits());
        for g in c.gates() {
            u = dense_gate(c.n_qubits(), g).matmul(&u);
        }
        u.scale(phase_factor(c.global_phase()))
    }

    pub(crate) fn random_bound_circuit(rng: &mut impl Rng, n: usize, len: usize) -> Circuit {
        let mut c = Circuit::new(n).unwrap();
        c.set_phase(rng.random_range(-PI..PI)).unwrap();
        for _ in 0..len {
            let q = rng.random_range(0..n);
            let g = match rng.random_range(0..8) {
                0 => Gate::rx(q, rng.random_range(-PI..PI)),
                1 => Gate::ry(q, rng.random_range(-PI..PI)),
                2 => Gate::rz(q, rng.random_range(-PI..PI)),
                3 => Gate::sx(q),
                4 => Gate::h(q),
                5 => Gate::x(q),
                _ if n > 1 => {
                    let mut t = rng.random_range(0..n);
                    while t == q {
                        t = rng.random_range(0..n);
                    }
                    if rng.random_bool(0.8) { Gate::cnot(q, t) } else { Gate::swap(q, t) }
                }
                _ => Gate::id(q),
            };
            c.push(g).unwrap();
        }
        c
    }

    #[test]
    fn basic_actions() {
        let x = Circuit::from_gates(1, [Gate::x(0)]).unwrap();
        let s = run(&x, &Statevector::zero(1)).unwrap();
        assert_eq!(s.amplitudes(), &[ZERO, ONE]);

        let sx2 = Circuit::from_gates(1, [Gate::sx(0), Gate::sx(0)]).unwrap();
        let s = run(&sx2, &Statevector::zero(1)).unwrap();
        assert!((s.amplitudes()[1] - ONE).norm() < 1e-15);
        assert!(s.amplitudes()[0].norm() < 1e-15);

        // |01⟩ with qubit 0 set is index 1; CNOT(0→1) gives index 3.
        let cx = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let s = run(&cx, &Statevector::basis(2, 1)).unwrap();
        assert_eq!(s, Statevector::basis(2, 3));
    }

    #[test]
    fn unitary_examples() {
        let empty = Circuit::new(1).unwrap();
        assert_eq!(unitary_of(&empty).unwrap(), UnitaryMatrix::identity(2));

        let theta = 0.83;
        let rz = Circuit::from_gates(1, [Gate::rz(0, theta)]).unwrap();
        let u = unitary_of(&rz).unwrap();
        assert!((u.get(0, 0) - C64::from_polar(1.0, -theta / 2.0)).norm() < 1e-15);
        assert!((u.get(1, 1) - C64::from_polar(1.0, theta / 2.0)).norm() < 1e-15);
        assert_eq!(u.get(0, 1), ZERO);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let c = Circuit::from_gates(
            2,
            [Gate::ry(0, rng.random_range(-PI..PI)), Gate::cnot(1, 0), Gate::rx(1, 0.3)],
        )
        .unwrap();
        assert!(unitary_of(&c).unwrap().max_abs_diff(&dense_oracle(&c)) < 1e-12);
    }

    #[test]
    fn caps_and_errors() {
        let wide = Circuit::new(11).unwrap();
        assert!(matches!(unitary_of(&wide), Err(Error::Resource(_))));
        let c = Circuit::new(2).unwrap();
        assert!(matches!(run(&c, &Statevector::zero(3)), Err(Error::Dimension { .. })));
        let tagged = Circuit::from_gates(1, [Gate::tagged(GateKind::Rx, 0, 0)]).unwrap();
        assert!(matches!(run(&tagged, &Statevector::zero(1)), Err(Error::Unbound(0))));
    }

    #[test]
    fn expval_examples() {
        let empty = Circuit::new(1).unwrap();
        assert_eq!(expval_z(&empty, 0, &Statevector::zero(1)).unwrap(), 1.0);
        let x = Circuit::from_gates(1, [Gate::x(0)]).unwrap();
        assert_eq!(expval_z(&x, 0, &Statevector::zero(1)).unwrap(), -1.0);
        let ry = Circuit::from_gates(1, [Gate::ry(0, PI / 2.0)]).unwrap();
        assert!(expval_z(&ry, 0, &Statevector::zero(1)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn equivalence_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let u = unitary_of(&random_bound_circuit(&mut rng, 2, 10)).unwrap();
        assert!(equiv_up_to_phase(&u, &u, 1e-9).unwrap());
        assert!(equiv_up_to_phase(&u, &u.scale(phase_factor(0.3)), 1e-9).unwrap());
        let id = UnitaryMatrix::identity(2);
        let x = unitary_of(&Circuit::from_gates(1, [Gate::x(0)]).unwrap()).unwrap();
        assert!(!equiv_up_to_phase(&id, &x, 1e-9).unwrap());
        assert!(equiv_up_to_phase(&id, &u, 1e-9).is_err());
    }

    #[test]
    fn norm_preserved_on_random_circuits() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let n = rng.random_range(1..=5);
            let len = rng.random_range(0..40);
            let c = random_bound_circuit(&mut rng, n, len);
            let mut amps: Vec<C64> = (0..1 << n)
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.iter_mut().for_each(|a| *a /= norm);
            let psi = Statevector::from_amplitudes(amps).unwrap();
            let out = run(&c, &psi).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn composition_matches_product() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let n = rng.random_range(1..=4);
            let c1 = random_bound_circuit(&mut rng, n, 15);
            let c2 = random_bound_circuit(&mut rng, n, 15);
            let mut both = c1.clone();
            both.append(&c2).unwrap();
            let lhs = unitary_of(&both).unwrap();
            let rhs = unitary_of(&c2).unwrap().matmul(&unitary_of(&c1).unwrap());
            assert!(lhs.max_abs_diff(&rhs) < 1e-9);
            assert!(lhs.max_abs_diff(&dense_oracle(&both)) < 1e-9);
        }
    }

    #[test]
    fn expval_matches_dense_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let n = rng.random_range(1..=4);
            let c = random_bound_circuit(&mut rng, n, 20);
            let q = rng.random_range(0..n);
            let u = dense_oracle(&c);
            // ψ' = U|0⟩ is column 0; ⟨Z_q⟩ = Σ_i ±|ψ'_i|².
            let want: f64 = (0..1 << n)
                .map(|i| {
                    let p = u.get(i, 0).norm_sqr();
                    if i >> q & 1 == 0 { p } else { -p }
                })
                .sum();
            let got = expval_z(&c, q, &Statevector::zero(n)).unwrap();
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_unitary_matches_swap() {
        let swap = Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap();
        assert_eq!(unitary_of(&swap).unwrap(), permutation_unitary(&[1, 0]));
        assert_eq!(permutation_unitary(&[0, 1, 2]), UnitaryMatrix::identity(8));
    }
}
