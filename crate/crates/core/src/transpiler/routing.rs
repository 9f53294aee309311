//! Coupling maps and greedy SWAP routing.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

/// Undirected physical connectivity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingMap {
    n_physical: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CouplingMap {
    /// Chain `0–1–…–(n−1)`.
    pub fn linear(n_physical: usize) -> CouplingMap {
        CouplingMap {
            n_physical,
            edges: (1..n_physical).map(|i| (i - 1, i)).collect(),
        }
    }

    pub fn from_edges(n_physical: usize, edges: &[(usize, usize)]) -> Result<CouplingMap> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n_physical || b >= n_physical {
                return Err(Error::Coupling(format!(
                    "edge ({a}, {b}) references a qubit outside 0..{n_physical}"
                )));
            }
            if a == b {
                return Err(Error::Coupling(format!("self-loop on qubit {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(CouplingMap {
            n_physical,
            edges: set,
        })
    }

    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn is_coupled(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    fn neighbors(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == q {
                Some(b)
            } else if b == q {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.n_physical <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n_physical];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(q) = queue.pop_front() {
            for nb in self.neighbors(q) {
                if !seen[nb] {
                    seen[nb] = true;
                    count += 1;
                    queue.push_back(nb);
                }
            }
        }
        count == self.n_physical
    }

    /// BFS path from `from` to `to` (inclusive). Ties go to the smaller
    /// neighbor index since edges are iterated in sorted order.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.n_physical];
        prev[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(q) = queue.pop_front() {
            if q == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for nb in self.neighbors(q) {
                if prev[nb] == usize::MAX {
                    prev[nb] = q;
                    queue.push_back(nb);
                }
            }
        }
        None
    }
}

/// Routed circuit and where each logical qubit ended up.
#[derive(Debug, Clone, PartialEq)]
pub struct Routed {
    pub circuit: Circuit,
    /// `final_layout[l]` is the physical wire holding logical qubit `l`
    /// (ancillas `l ≥ n_logical` included).
    pub final_layout: Vec<usize>,
}

fn push_swap(out: &mut Circuit, a: usize, b: usize) -> Result<()> {
    out.push(Gate::cnot(a, b))?;
    out.push(Gate::cnot(b, a))?;
    out.push(Gate::cnot(a, b))
}

/// Place `c` on the coupling map with the trivial initial layout, inserting
/// SWAP chains (as three CNOTs each) that walk the control toward the target.
pub fn route(c: &Circuit, coupling: &CouplingMap) -> Result<Routed> {
    let n_phys = coupling.n_physical();
    if c.n_qubits() > n_phys {
        return Err(Error::Coupling(format!(
            "circuit width {} exceeds {n_phys} physical qubits",
            c.n_qubits()
        )));
    }
    if !coupling.is_connected() {
        return Err(Error::Coupling("coupling graph is disconnected".into()));
    }
    let mut pos: Vec<usize> = (0..n_phys).collect();
    let mut occ: Vec<usize> = (0..n_phys).collect();
    let mut out = Circuit::new(n_phys)?;
    out.set_phase(c.global_phase())?;

    for g in c.gates() {
        match g.kind() {
            GateKind::Cnot => {
                let (lc, lt) = (g.qubits()[0], g.qubits()[1]);
                if !coupling.is_coupled(pos[lc], pos[lt]) {
                    let path = coupling
                        .shortest_path(pos[lc], pos[lt])
                        .ok_or_else(|| Error::Coupling("no path between qubits".into()))?;
                    for w in path[..path.len() - 1].windows(2) {
                        let (a, b) = (w[0], w[1]);
                        push_swap(&mut out, a, b)?;
                        let (la, lb) = (occ[a], occ[b]);
                        occ.swap(a, b);
                        pos[la] = b;
                        pos[lb] = a;
                    }
                }
                out.push(Gate::cnot(pos[lc], pos[lt]))?;
            }
            GateKind::Swap => {
                return Err(Error::NonBasis {
                    gate: "swap (expand before routing)".into(),
                })
            }
            _ => out.push(g.relabeled(|q| pos[q]))?,
        }
    }
    Ok(Routed {
        circuit: out,
        final_layout: pos,
    })
}
