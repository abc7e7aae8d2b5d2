//! Precomputed instance data and the incremental per-tick compatibility
//! state shared by the greedy and exact schedulers.

use crate::circuit::{validate_circuit, Circuit, GateKind};
use crate::constraints::{ConstraintFlags, ConstraintSet};
use crate::error::{Error, Result};

use super::IdleWindowPolicy;

pub(crate) struct Prepared<'a> {
    pub circuit: &'a Circuit,
    pub flags: ConstraintFlags,
    pub policy: IdleWindowPolicy,
    pub kind: Vec<GateKind>,
    pub dur: Vec<u32>,
    pub qubits: Vec<Vec<usize>>,
    /// Distinct blocks touched by each gate.
    pub blocks: Vec<Vec<usize>>,
    pub preds: Vec<Vec<usize>>,
    pub topo: Vec<usize>,
    /// Longest duration-weighted path from a gate's start to the circuit end.
    pub tail: Vec<u32>,
    /// `overlap[x]`: qubits that must be parked or match while `x` is busy.
    pub overlap: Vec<Vec<usize>>,
    /// `overlap_rev[y]`: qubits `x` with `y` in `overlap[x]`.
    pub overlap_rev: Vec<Vec<usize>>,
    pub on_qubit: Vec<Vec<usize>>,
    /// Static lower bound on each qubit's idle ticks under first-to-last
    /// accounting: path from its first gate to the end of its last gate minus
    /// its busy ticks.
    pub static_qubit_lb: Vec<u64>,
    pub n_blocks: usize,
}

impl<'a> Prepared<'a> {
    pub fn new(c: &'a Circuit, cs: &ConstraintSet, policy: IdleWindowPolicy) -> Result<Prepared<'a>> {
        validate_circuit(c).into_result()?;
        let arch = cs.arch;
        if arch.n_qubits() < c.n_qubits() {
            return Err(Error::InvalidArch(format!(
                "architecture has {} qubits, circuit needs {}",
                arch.n_qubits(),
                c.n_qubits()
            )));
        }
        for g in c.gates() {
            if g.kind == GateKind::CPhase && !arch.can_couple(g.qubits[0], g.qubits[1]) {
                return Err(Error::Unschedulable {
                    gate: g.id,
                    reason: format!("qubits {} and {} are not a CPHASE neighbor pair", g.qubits[0], g.qubits[1]),
                });
            }
        }

        let n = c.len();
        let kind: Vec<GateKind> = c.gates().iter().map(|g| g.kind).collect();
        let dur: Vec<u32> = c.gates().iter().map(|g| g.duration_ticks).collect();
        let qubits: Vec<Vec<usize>> = c.gates().iter().map(|g| g.qubits.clone()).collect();
        let blocks = qubits
            .iter()
            .map(|qs| {
                let mut b: Vec<usize> = qs.iter().map(|&q| arch.block_of(q)).collect();
                b.sort();
                b.dedup();
                b
            })
            .collect();
        let preds = c.predecessors();
        let succs = c.successors();
        let topo = c.topological_order().expect("validated circuit is acyclic");

        let mut tail = vec![0u32; n];
        for &g in topo.iter().rev() {
            tail[g] = dur[g] + succs[g].iter().map(|&s| tail[s]).max().unwrap_or(0);
        }

        let n_q = c.n_qubits();
        let mut overlap = vec![Vec::new(); n_q];
        let mut overlap_rev = vec![Vec::new(); n_q];
        if cs.flags.park_crosstalk {
            for (&x, ys) in arch.signal_overlap() {
                for &y in ys {
                    if x < n_q && y < n_q && x != y {
                        overlap[x].push(y);
                        overlap_rev[y].push(x);
                    }
                }
            }
        }

        let on_qubit = c.gates_on_qubits();
        let mut static_qubit_lb = vec![0u64; n_q];
        let mut dist = vec![i64::MIN; n];
        for (q, gates) in on_qubit.iter().enumerate() {
            if gates.is_empty() {
                continue;
            }
            let first = *gates.iter().min_by_key(|&&g| position(&topo, g)).unwrap();
            let last = *gates.iter().max_by_key(|&&g| position(&topo, g)).unwrap();
            dist.iter_mut().for_each(|d| *d = i64::MIN);
            dist[first] = 0;
            for &g in &topo {
                if dist[g] == i64::MIN {
                    continue;
                }
                let end = dist[g] + i64::from(dur[g]);
                for &s in &succs[g] {
                    dist[s] = dist[s].max(end);
                }
            }
            let span = (dist[last] + i64::from(dur[last])) as u64;
            let busy: u64 = gates.iter().map(|&g| u64::from(dur[g])).sum();
            static_qubit_lb[q] = span.saturating_sub(busy);
        }

        Ok(Prepared {
            circuit: c,
            flags: cs.flags,
            policy,
            kind,
            dur,
            qubits,
            blocks,
            preds,
            topo,
            tail,
            overlap,
            overlap_rev,
            on_qubit,
            static_qubit_lb,
            n_blocks: arch.blocks().len(),
        })
    }

    pub fn n_gates(&self) -> usize {
        self.kind.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.on_qubit.len()
    }

    /// Priority order: longest tail first, then lower id.
    pub fn sort_by_priority(&self, gates: &mut [usize]) {
        gates.sort_by(|&a, &b| self.tail[b].cmp(&self.tail[a]).then(a.cmp(&b)));
    }
}

fn position(order: &[usize], g: usize) -> usize {
    order.iter().position(|&x| x == g).unwrap()
}

/// What is active at the tick currently being filled.
#[derive(Debug, Clone)]
pub(crate) struct TickState {
    qubit_gate: Vec<Option<usize>>,
    block_count: Vec<u32>,
    block_kind: Vec<Option<GateKind>>,
    block_msr: Vec<u32>,
}

impl TickState {
    pub fn new(n_qubits: usize, n_blocks: usize) -> Self {
        TickState {
            qubit_gate: vec![None; n_qubits],
            block_count: vec![0; n_blocks],
            block_kind: vec![None; n_blocks],
            block_msr: vec![0; n_blocks],
        }
    }

    pub fn clear(&mut self) {
        self.qubit_gate.iter_mut().for_each(|q| *q = None);
        self.block_count.iter_mut().for_each(|b| *b = 0);
        self.block_kind.iter_mut().for_each(|b| *b = None);
        self.block_msr.iter_mut().for_each(|b| *b = 0);
    }

    pub fn is_busy(&self, q: usize) -> bool {
        self.qubit_gate[q].is_some()
    }

    pub fn compatible(&self, p: &Prepared, g: usize) -> bool {
        let kind = p.kind[g];
        if p.qubits[g].iter().any(|&q| self.qubit_gate[q].is_some()) {
            return false;
        }
        if p.flags.block_same_protocol
            && p.blocks[g].iter().any(|&b| self.block_count[b] > 0 && self.block_kind[b] != Some(kind))
        {
            return false;
        }
        if p.flags.one_measurement_per_block
            && kind == GateKind::Msr
            && p.blocks[g].iter().any(|&b| self.block_msr[b] > 0)
        {
            return false;
        }
        if p.flags.park_crosstalk {
            for &x in &p.qubits[g] {
                let clash =
                    |y: &usize| !p.qubits[g].contains(y) && self.qubit_gate[*y].is_some_and(|h| p.kind[h] != kind);
                if p.overlap[x].iter().any(clash) || p.overlap_rev[x].iter().any(clash) {
                    return false;
                }
            }
        }
        true
    }

    pub fn add(&mut self, p: &Prepared, g: usize) {
        for &q in &p.qubits[g] {
            self.qubit_gate[q] = Some(g);
        }
        for &b in &p.blocks[g] {
            self.block_count[b] += 1;
            self.block_kind[b] = Some(p.kind[g]);
            if p.kind[g] == GateKind::Msr {
                self.block_msr[b] += 1;
            }
        }
    }

    pub fn remove(&mut self, p: &Prepared, g: usize) {
        for &q in &p.qubits[g] {
            self.qubit_gate[q] = None;
        }
        for &b in &p.blocks[g] {
            self.block_count[b] -= 1;
            if self.block_count[b] == 0 {
                self.block_kind[b] = None;
            }
            if p.kind[g] == GateKind::Msr {
                self.block_msr[b] -= 1;
            }
        }
    }
}
