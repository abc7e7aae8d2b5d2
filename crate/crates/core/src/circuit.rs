//! Typed quantum circuits as gate precedence DAGs.
//!
//! Gates are opaque typed operations: the scheduler and the error budget only
//! look at a gate's kind, operands, duration and position in the DAG.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    Prep,
    XHalfPi,
    ZHalfPi,
    ZPi,
    CPhase,
    Msr,
    /// Only ever appears in schedules, never in a circuit's gate list.
    Idle,
}

impl GateKind {
    /// Every kind that may appear in a circuit, in census order.
    pub const SCHEDULABLE: [GateKind; 6] =
        [GateKind::Prep, GateKind::XHalfPi, GateKind::ZHalfPi, GateKind::ZPi, GateKind::CPhase, GateKind::Msr];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CPhase => 2,
            _ => 1,
        }
    }

    /// Short label used in schedule grids and census lines.
    pub fn label(self) -> &'static str {
        match self {
            GateKind::Prep => "Prep",
            GateKind::XHalfPi => "X",
            GateKind::ZHalfPi => "Z",
            GateKind::ZPi => "Zpi",
            GateKind::CPhase => "CPHASE",
            GateKind::Msr => "Msr",
            GateKind::Idle => "idle",
        }
    }

    pub fn from_label(label: &str) -> Option<GateKind> {
        [GateKind::Idle].into_iter().chain(GateKind::SCHEDULABLE).find(|k| k.label() == label)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn one_tick() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: usize,
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(rename = "duration", default = "one_tick")]
    pub duration_ticks: u32,
}

/// A gate list plus precedence edges. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    deps: BTreeSet<(usize, usize)>,
}

impl Circuit {
    /// Wraps raw parts without checking them; run [`validate_circuit`] on
    /// anything that did not come from a builder.
    pub fn from_parts(n_qubits: usize, gates: Vec<Gate>, deps: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Circuit { n_qubits, gates, deps: deps.into_iter().collect() }
    }

    pub fn empty(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new(), deps: BTreeSet::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: usize) -> &Gate {
        &self.gates[id]
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn deps(&self) -> &BTreeSet<(usize, usize)> {
        &self.deps
    }

    /// Direct predecessors of each gate, indexed by gate id.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.gates.len()];
        for &(u, v) in &self.deps {
            if v < preds.len() {
                preds[v].push(u);
            }
        }
        preds
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut succs = vec![Vec::new(); self.gates.len()];
        for &(u, v) in &self.deps {
            if u < succs.len() {
                succs[u].push(v);
            }
        }
        succs
    }

    /// Gate ids touching each qubit, in id order.
    pub fn gates_on_qubits(&self) -> Vec<Vec<usize>> {
        let mut on = vec![Vec::new(); self.n_qubits];
        for g in &self.gates {
            for &q in &g.qubits {
                if q < self.n_qubits {
                    on[q].push(g.id);
                }
            }
        }
        on
    }

    /// Kahn topological order, ties broken by lower id. `None` if cyclic.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.gates.len();
        let succs = self.successors();
        let mut indeg = vec![0usize; n];
        for &(u, v) in &self.deps {
            if u < n && v < n {
                indeg[v] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&g| indeg[g] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(g) = ready.pop_first() {
            order.push(g);
            for &s in &succs[g] {
                if s < n {
                    indeg[s] -= 1;
                    if indeg[s] == 0 {
                        ready.insert(s);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Appends gates in program order, wiring each new gate after the previous
/// gate on every qubit it touches.
#[derive(Debug)]
pub struct CircuitBuilder {
    n_qubits: usize,
    gates: Vec<Gate>,
    deps: BTreeSet<(usize, usize)>,
    last_on: Vec<Option<usize>>,
}

impl CircuitBuilder {
    pub fn new(n_qubits: usize) -> Self {
        CircuitBuilder { n_qubits, gates: Vec::new(), deps: BTreeSet::new(), last_on: vec![None; n_qubits] }
    }

    pub fn push(&mut self, kind: GateKind, qubits: &[usize]) -> usize {
        self.push_with_duration(kind, qubits, 1)
    }

    pub fn push_with_duration(&mut self, kind: GateKind, qubits: &[usize], duration_ticks: u32) -> usize {
        let id = self.gates.len();
        for &q in qubits {
            if let Some(prev) = self.last_on[q] {
                self.deps.insert((prev, id));
            }
            self.last_on[q] = Some(id);
        }
        self.gates.push(Gate { id, kind, qubits: qubits.to_vec(), duration_ticks });
        id
    }

    /// Adds an explicit precedence edge beyond program order.
    pub fn depend(&mut self, from: usize, to: usize) {
        self.deps.insert((from, to));
    }

    pub fn build(self) -> Circuit {
        Circuit { n_qubits: self.n_qubits, gates: self.gates, deps: self.deps }
    }
}

/// Data qubit `d_r,c` of the 3x3 grid, row-major.
pub const fn data_qubit(row: usize, col: usize) -> usize {
    row * 3 + col
}

/// Ancilla `a_i` sits after the nine data qubits.
pub const fn ancilla_qubit(i: usize) -> usize {
    9 + i
}

/// Vertically adjacent data pairs measured by ZZ gauge checks, ancillas a0..a5.
pub const ZZ_CHECK_PAIRS: [(usize, usize); 6] = [(0, 3), (3, 6), (1, 4), (4, 7), (2, 5), (5, 8)];
/// Horizontally adjacent data pairs measured by XX gauge checks, ancillas a6..a11.
pub const XX_CHECK_PAIRS: [(usize, usize); 6] = [(0, 1), (1, 2), (3, 4), (4, 5), (6, 7), (7, 8)];

fn push_gauge_check(b: &mut CircuitBuilder, ancilla: usize, first: usize, second: usize) {
    b.push(GateKind::Prep, &[ancilla]);
    b.push(GateKind::XHalfPi, &[ancilla]);
    b.push(GateKind::CPhase, &[ancilla, first]);
    b.push(GateKind::CPhase, &[ancilla, second]);
    b.push(GateKind::XHalfPi, &[ancilla]);
    b.push(GateKind::Msr, &[ancilla]);
}

/// One half-round of gauge measurements for BS9(21): 9 data qubits on a
/// row-major 3x3 grid (ids 0..9) and 12 ancillas (ids 9..21).
///
/// Phases are ZZ checks, a forward basis change on every data qubit, XX
/// checks, then a backward basis change. Only per-qubit program order links
/// the phases, so independent checks stay unordered.
pub fn generate_bs9_21_half_round() -> Circuit {
    let mut b = CircuitBuilder::new(21);
    for (i, &(first, second)) in ZZ_CHECK_PAIRS.iter().enumerate() {
        push_gauge_check(&mut b, ancilla_qubit(i), first, second);
    }
    for d in 0..9 {
        b.push(GateKind::XHalfPi, &[d]);
        b.push(GateKind::ZHalfPi, &[d]);
    }
    for (i, &(first, second)) in XX_CHECK_PAIRS.iter().enumerate() {
        push_gauge_check(&mut b, ancilla_qubit(6 + i), first, second);
    }
    for d in 0..9 {
        b.push(GateKind::ZHalfPi, &[d]);
        b.push(GateKind::XHalfPi, &[d]);
    }
    b.build()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum CircuitViolation {
    IdMismatch { index: usize, id: usize },
    WrongArity { gate: usize, kind: GateKind, operands: usize },
    IdleGate { gate: usize },
    DuplicateQubit { gate: usize, qubit: usize },
    QubitOutOfRange { gate: usize, qubit: usize },
    ZeroDuration { gate: usize },
    DanglingDep { from: usize, to: usize },
    Cycle { gates: Vec<usize> },
    BrokenChain { qubit: usize, first: usize, second: usize },
}

impl fmt::Display for CircuitViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitViolation::IdMismatch { index, id } => write!(f, "gate at index {index} has id {id}"),
            CircuitViolation::WrongArity { gate, kind, operands } => {
                write!(f, "gate {gate} ({kind}) has {operands} operands, expected {}", kind.arity())
            }
            CircuitViolation::IdleGate { gate } => write!(f, "gate {gate} is an Idle, which only exists in schedules"),
            CircuitViolation::DuplicateQubit { gate, qubit } => write!(f, "gate {gate} uses qubit {qubit} twice"),
            CircuitViolation::QubitOutOfRange { gate, qubit } => {
                write!(f, "gate {gate} uses qubit {qubit} out of range")
            }
            CircuitViolation::ZeroDuration { gate } => write!(f, "gate {gate} has zero duration"),
            CircuitViolation::DanglingDep { from, to } => write!(f, "dependency {from}->{to} names a missing gate"),
            CircuitViolation::Cycle { gates } => write!(f, "dependency cycle through gates {gates:?}"),
            CircuitViolation::BrokenChain { qubit, first, second } => {
                write!(f, "gates {first} and {second} share qubit {qubit} but are not ordered")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<CircuitViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        let text: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        Err(Error::InvalidCircuit(text.join("; ")))
    }
}

/// Collects every broken circuit invariant. An empty report means the circuit
/// is valid.
pub fn validate_circuit(c: &Circuit) -> ValidationReport {
    let mut violations = Vec::new();
    let n = c.gates.len();

    for (index, g) in c.gates.iter().enumerate() {
        if g.id != index {
            violations.push(CircuitViolation::IdMismatch { index, id: g.id });
        }
        if g.kind == GateKind::Idle {
            violations.push(CircuitViolation::IdleGate { gate: g.id });
        } else if g.qubits.len() != g.kind.arity() {
            violations.push(CircuitViolation::WrongArity { gate: g.id, kind: g.kind, operands: g.qubits.len() });
        }
        let mut seen = BTreeSet::new();
        for &q in &g.qubits {
            if q >= c.n_qubits {
                violations.push(CircuitViolation::QubitOutOfRange { gate: g.id, qubit: q });
            }
            if !seen.insert(q) {
                violations.push(CircuitViolation::DuplicateQubit { gate: g.id, qubit: q });
            }
        }
        if g.duration_ticks == 0 {
            violations.push(CircuitViolation::ZeroDuration { gate: g.id });
        }
    }

    let mut dangling = false;
    for &(from, to) in &c.deps {
        if from >= n || to >= n {
            violations.push(CircuitViolation::DanglingDep { from, to });
            dangling = true;
        }
    }

    match c.topological_order() {
        None => {
            let order_free = cyclic_gates(c);
            violations.push(CircuitViolation::Cycle { gates: order_free });
        }
        Some(order) if !dangling => {
            let reach = reachability(c, &order);
            for (q, on) in c.gates_on_qubits().iter().enumerate() {
                for (i, &a) in on.iter().enumerate() {
                    for &b in &on[i + 1..] {
                        if a != b && !reach[a].contains(b) && !reach[b].contains(a) {
                            violations.push(CircuitViolation::BrokenChain { qubit: q, first: a, second: b });
                        }
                    }
                }
            }
        }
        Some(_) => {}
    }

    ValidationReport { violations }
}

/// Gates left over after peeling every zero-indegree node, i.e. the ones on
/// or downstream of a cycle.
fn cyclic_gates(c: &Circuit) -> Vec<usize> {
    let n = c.gates.len();
    let succs = c.successors();
    let mut indeg = vec![0usize; n];
    for &(u, v) in &c.deps {
        if u < n && v < n {
            indeg[v] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&g| indeg[g] == 0).collect();
    let mut removed = vec![false; n];
    while let Some(g) = queue.pop_front() {
        removed[g] = true;
        for &s in &succs[g] {
            if s < n {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    queue.push_back(s);
                }
            }
        }
    }
    (0..n).filter(|&g| !removed[g]).collect()
}

/// Fixed-size bitset used for transitive reachability.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub(crate) fn new(bits: usize) -> Self {
        BitSet { words: vec![0; bits.div_ceil(64)] }
    }

    pub(crate) fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub(crate) fn into_words(self) -> Vec<u64> {
        self.words
    }

    pub(crate) fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub(crate) fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }
}

/// `reach[g]` holds every gate reachable from `g` through one or more edges.
pub(crate) fn reachability(c: &Circuit, topo: &[usize]) -> Vec<BitSet> {
    let n = c.gates.len();
    let succs = c.successors();
    let mut reach = vec![BitSet::new(n); n];
    for &g in topo.iter().rev() {
        let mut r = BitSet::new(n);
        for &s in &succs[g] {
            r.insert(s);
            r.union_with(&reach[s]);
        }
        reach[g] = r;
    }
    reach
}

/// Per-kind gate counts. `Idle` is never counted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateCensus {
    counts: BTreeMap<GateKind, usize>,
}

impl Default for GateCensus {
    fn default() -> Self {
        GateCensus { counts: GateKind::SCHEDULABLE.iter().map(|&k| (k, 0)).collect() }
    }
}

impl GateCensus {
    pub fn get(&self, kind: GateKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn counts(&self) -> &BTreeMap<GateKind, usize> {
        &self.counts
    }

    /// `Prep 12 / X 42 / Z 18 / CPHASE 24 / Msr 12`; kinds with a zero
    /// count other than the five half-round kinds are left out.
    pub fn summary_line(&self) -> String {
        let always = [GateKind::Prep, GateKind::XHalfPi, GateKind::ZHalfPi, GateKind::CPhase, GateKind::Msr];
        GateKind::SCHEDULABLE
            .iter()
            .filter(|k| always.contains(k) || self.get(**k) > 0)
            .map(|k| format!("{} {}", k.label(), self.get(*k)))
            .collect::<Vec<_>>()
            .join(" / ")
    }
}

pub fn census(c: &Circuit) -> GateCensus {
    let mut cns = GateCensus::default();
    for g in &c.gates {
        if g.kind != GateKind::Idle {
            *cns.counts.entry(g.kind).or_insert(0) += 1;
        }
    }
    cns
}

/// Number of distinct pulse protocols: one per non-CPhase kind present, plus
/// `cphase_protocols` if any CPhase is present.
pub fn protocol_set_size(cns: &GateCensus, cphase_protocols: usize) -> usize {
    let single = GateKind::SCHEDULABLE.iter().filter(|&&k| k != GateKind::CPhase && cns.get(k) > 0).count();
    let two = if cns.get(GateKind::CPhase) > 0 { cphase_protocols } else { 0 };
    single + two
}
