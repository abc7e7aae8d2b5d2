//! Feasibility predicates for tick-indexed schedules.
//!
//! A gate occupies each of its qubits for `[start, start + duration)`. A
//! qubit with no gate at a tick is parked. Precedence is always checked; the
//! electronics predicates are switched by [`ConstraintFlags`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::layout::ArchModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Precedence,
    BlockSameProtocol,
    OneMeasurementPerBlock,
    ParkCrosstalk,
}

/// Optional electronics constraints. Precedence has no flag: it is always on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintFlags {
    pub block_same_protocol: bool,
    pub one_measurement_per_block: bool,
    pub park_crosstalk: bool,
}

impl ConstraintFlags {
    pub const fn none() -> Self {
        ConstraintFlags { block_same_protocol: false, one_measurement_per_block: false, park_crosstalk: false }
    }

    pub const fn all() -> Self {
        ConstraintFlags { block_same_protocol: true, one_measurement_per_block: true, park_crosstalk: true }
    }

    pub fn any(&self) -> bool {
        self.block_same_protocol || self.one_measurement_per_block || self.park_crosstalk
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstraintSet<'a> {
    pub flags: ConstraintFlags,
    pub arch: &'a ArchModel,
}

impl<'a> ConstraintSet<'a> {
    pub fn new(flags: ConstraintFlags, arch: &'a ArchModel) -> Self {
        ConstraintSet { flags, arch }
    }
}

/// Start tick per gate id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TickAssignment(pub BTreeMap<usize, u32>);

impl TickAssignment {
    pub fn from_starts(starts: &[u32]) -> Self {
        TickAssignment(starts.iter().copied().enumerate().collect())
    }

    pub fn start(&self, gate: usize) -> Option<u32> {
        self.0.get(&gate).copied()
    }

    pub fn set(&mut self, gate: usize, tick: u32) {
        self.0.insert(gate, tick);
    }

    /// Dense start vector, or the first gate missing a tick.
    pub fn to_dense(&self, n_gates: usize) -> Result<Vec<u32>> {
        (0..n_gates).map(|g| self.start(g).ok_or(Error::IncompleteAssignment(g))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintKind,
    pub tick: u32,
    pub gates: Vec<usize>,
    pub blocks: Vec<usize>,
    pub message: String,
}

fn sort_violations(v: &mut [Violation]) {
    v.sort_by(|a, b| (a.tick, &a.gates, a.constraint, &a.blocks).cmp(&(b.tick, &b.gates, b.constraint, &b.blocks)));
}

/// Active gates per tick, skipping unassigned gates.
fn active_by_tick(c: &Circuit, t: &TickAssignment) -> BTreeMap<u32, Vec<usize>> {
    let mut active: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for g in c.gates() {
        if let Some(s) = t.start(g.id) {
            for tick in s..s + g.duration_ticks {
                active.entry(tick).or_default().push(g.id);
            }
        }
    }
    active
}

fn end_of(c: &Circuit, t: &TickAssignment, g: usize) -> Option<u32> {
    t.start(g).map(|s| s + c.gate(g).duration_ticks)
}

pub fn check_precedence(c: &Circuit, t: &TickAssignment) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut reported = BTreeSet::new();
    for &(u, v) in c.deps() {
        let (Some(end_u), Some(start_v)) = (end_of(c, t, u), t.start(v)) else { continue };
        if start_v < end_u {
            out.push(Violation {
                constraint: ConstraintKind::Precedence,
                tick: start_v,
                gates: vec![u, v],
                blocks: vec![],
                message: format!("gate {v} starts at {start_v} before predecessor {u} ends at {end_u}"),
            });
            reported.insert((u.min(v), u.max(v)));
        }
    }
    for (q, on) in c.gates_on_qubits().iter().enumerate() {
        for (i, &a) in on.iter().enumerate() {
            for &b in &on[i + 1..] {
                let (Some(sa), Some(sb)) = (t.start(a), t.start(b)) else { continue };
                let ea = sa + c.gate(a).duration_ticks;
                let eb = sb + c.gate(b).duration_ticks;
                if sa < eb && sb < ea && !reported.contains(&(a, b)) {
                    out.push(Violation {
                        constraint: ConstraintKind::Precedence,
                        tick: sa.max(sb),
                        gates: vec![a, b],
                        blocks: vec![],
                        message: format!("gates {a} and {b} overlap on qubit {q}"),
                    });
                }
            }
        }
    }
    sort_violations(&mut out);
    out
}

/// Active gates touching each block at one tick. A two-qubit gate whose
/// operands sit in one block is listed once.
fn gates_per_block(c: &Circuit, arch: &ArchModel, active: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut per_block: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &g in active {
        let mut blocks: Vec<usize> = c.gate(g).qubits.iter().map(|&q| arch.block_of(q)).collect();
        blocks.dedup();
        for b in blocks {
            per_block.entry(b).or_default().push(g);
        }
    }
    per_block
}

/// Shared-generator rule: at each tick, the busy qubits of a block all run
/// the same gate kind. A CPhase locks both operand blocks.
pub fn check_block_protocol(c: &Circuit, t: &TickAssignment, cs: &ConstraintSet) -> Vec<Violation> {
    let mut out = Vec::new();
    for (tick, active) in active_by_tick(c, t) {
        for (block, gates) in gates_per_block(c, cs.arch, &active) {
            let kinds: BTreeSet<GateKind> = gates.iter().map(|&g| c.gate(g).kind).collect();
            if kinds.len() > 1 {
                let mut gates = gates;
                gates.sort();
                out.push(Violation {
                    constraint: ConstraintKind::BlockSameProtocol,
                    tick,
                    message: format!("block {block} runs {kinds:?} at tick {tick}"),
                    gates,
                    blocks: vec![block],
                });
            }
        }
    }
    sort_violations(&mut out);
    out
}

/// One measurement line per block: at most one Msr per block at a time.
pub fn check_measurement_exclusivity(c: &Circuit, t: &TickAssignment, cs: &ConstraintSet) -> Vec<Violation> {
    let mut out = Vec::new();
    for (tick, active) in active_by_tick(c, t) {
        let msr: Vec<usize> = active.into_iter().filter(|&g| c.gate(g).kind == GateKind::Msr).collect();
        for (block, mut gates) in gates_per_block(c, cs.arch, &msr) {
            if gates.len() > 1 {
                gates.sort();
                out.push(Violation {
                    constraint: ConstraintKind::OneMeasurementPerBlock,
                    tick,
                    message: format!("block {block} measures {} qubits at tick {tick}", gates.len()),
                    gates,
                    blocks: vec![block],
                });
            }
        }
    }
    sort_violations(&mut out);
    out
}

/// A signal may pass over qubit `y` only while `y` is parked or running a
/// gate of the same kind.
pub fn check_park_crosstalk(c: &Circuit, t: &TickAssignment, cs: &ConstraintSet) -> Vec<Violation> {
    let mut out = Vec::new();
    if cs.arch.signal_overlap().is_empty() {
        return out;
    }
    for (tick, active) in active_by_tick(c, t) {
        let mut on_qubit: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &g in &active {
            for &q in &c.gate(g).qubits {
                on_qubit.entry(q).or_default().push(g);
            }
        }
        for &g in &active {
            let gate = c.gate(g);
            for &x in &gate.qubits {
                for y in cs.arch.overlapped_by(x) {
                    if gate.qubits.contains(&y) {
                        continue;
                    }
                    for &h in on_qubit.get(&y).into_iter().flatten() {
                        let other = c.gate(h);
                        if other.kind != gate.kind {
                            out.push(Violation {
                                constraint: ConstraintKind::ParkCrosstalk,
                                tick,
                                gates: vec![g, h],
                                blocks: vec![cs.arch.block_of(x), cs.arch.block_of(y)],
                                message: format!(
                                    "{} on qubit {x} routes over qubit {y} while it runs {}",
                                    gate.kind, other.kind
                                ),
                            });
                        }
                    }
                }
            }
        }
    }
    sort_violations(&mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Runs precedence plus every enabled check. An incomplete assignment is an
/// error rather than a violation.
pub fn is_feasible(c: &Circuit, t: &TickAssignment, cs: &ConstraintSet) -> Result<FeasibilityReport> {
    t.to_dense(c.len())?;
    let mut violations = check_precedence(c, t);
    if cs.flags.block_same_protocol {
        violations.extend(check_block_protocol(c, t, cs));
    }
    if cs.flags.one_measurement_per_block {
        violations.extend(check_measurement_exclusivity(c, t, cs));
    }
    if cs.flags.park_crosstalk {
        violations.extend(check_park_crosstalk(c, t, cs));
    }
    sort_violations(&mut violations);
    Ok(FeasibilityReport { feasible: violations.is_empty(), violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, Gate};

    fn two_qubit_block() -> ArchModel {
        ArchModel::new(3, vec![vec![0, 1], vec![2]], 0, [(0, 1), (1, 2), (0, 2)], BTreeMap::new()).unwrap()
    }

    fn single(kinds: &[(GateKind, usize)], n_qubits: usize) -> Circuit {
        let mut b = CircuitBuilder::new(n_qubits);
        for &(k, q) in kinds {
            b.push(k, &[q]);
        }
        b.build()
    }

    fn on(flags: ConstraintFlags, arch: &ArchModel) -> ConstraintSet<'_> {
        ConstraintSet::new(flags, arch)
    }

    #[test]
    fn precedence_examples() {
        let mut b = CircuitBuilder::new(2);
        let g0 = b.push(GateKind::Prep, &[0]);
        let g1 = b.push(GateKind::Prep, &[1]);
        b.depend(g0, g1);
        let c = b.build();
        assert!(check_precedence(&c, &TickAssignment::from_starts(&[0, 1])).is_empty());
        let v = check_precedence(&c, &TickAssignment::from_starts(&[0, 0]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, ConstraintKind::Precedence);
    }

    #[test]
    fn chained_gates_on_one_qubit_report_once() {
        let c = single(&[(GateKind::Prep, 0), (GateKind::Msr, 0)], 1);
        assert_eq!(check_precedence(&c, &TickAssignment::from_starts(&[0, 0])).len(), 1);
    }

    #[test]
    fn unordered_overlap_on_a_qubit() {
        let gates = vec![
            Gate { id: 0, kind: GateKind::Prep, qubits: vec![0], duration_ticks: 1 },
            Gate { id: 1, kind: GateKind::Prep, qubits: vec![0], duration_ticks: 1 },
        ];
        let c = Circuit::from_parts(1, gates, []);
        let v = check_precedence(&c, &TickAssignment::from_starts(&[3, 3]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].tick, 3);
        assert!(v[0].message.contains("overlap"));
    }

    #[test]
    fn block_protocol_examples() {
        let arch = two_qubit_block();
        let cs = on(ConstraintFlags::all(), &arch);
        let same = single(&[(GateKind::XHalfPi, 0), (GateKind::XHalfPi, 1)], 3);
        assert!(check_block_protocol(&same, &TickAssignment::from_starts(&[2, 2]), &cs).is_empty());
        let mixed = single(&[(GateKind::XHalfPi, 0), (GateKind::Msr, 1)], 3);
        let v = check_block_protocol(&mixed, &TickAssignment::from_starts(&[2, 2]), &cs);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].blocks, vec![0]);
        assert_eq!(v[0].gates, vec![0, 1]);
        let lone = single(&[(GateKind::XHalfPi, 0)], 3);
        assert!(check_block_protocol(&lone, &TickAssignment::from_starts(&[2]), &cs).is_empty());
    }

    #[test]
    fn cphase_locks_both_blocks() {
        let arch = two_qubit_block();
        let cs = on(ConstraintFlags::all(), &arch);
        let mut b = CircuitBuilder::new(3);
        b.push(GateKind::CPhase, &[1, 2]);
        b.push(GateKind::XHalfPi, &[0]);
        let c = b.build();
        let v = check_block_protocol(&c, &TickAssignment::from_starts(&[0, 0]), &cs);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].blocks, vec![0]);
    }

    #[test]
    fn measurement_examples() {
        let arch = two_qubit_block();
        let cs = on(ConstraintFlags::all(), &arch);
        let c = single(&[(GateKind::Msr, 0), (GateKind::Msr, 1)], 3);
        assert_eq!(check_measurement_exclusivity(&c, &TickAssignment::from_starts(&[5, 5]), &cs).len(), 1);
        assert!(check_measurement_exclusivity(&c, &TickAssignment::from_starts(&[5, 6]), &cs).is_empty());
        let apart = single(&[(GateKind::Msr, 0), (GateKind::Msr, 2)], 3);
        assert!(check_measurement_exclusivity(&apart, &TickAssignment::from_starts(&[5, 5]), &cs).is_empty());
    }

    fn overlap_arch() -> ArchModel {
        let overlap = BTreeMap::from([(0, BTreeSet::from([2]))]);
        ArchModel::new(3, vec![vec![0], vec![1], vec![2]], 0, [], overlap).unwrap()
    }

    #[test]
    fn park_examples() {
        let arch = overlap_arch();
        let cs = on(ConstraintFlags::all(), &arch);
        let parked = single(&[(GateKind::XHalfPi, 0)], 3);
        assert!(check_park_crosstalk(&parked, &TickAssignment::from_starts(&[4]), &cs).is_empty());
        let clash = single(&[(GateKind::XHalfPi, 0), (GateKind::ZHalfPi, 2)], 3);
        let v = check_park_crosstalk(&clash, &TickAssignment::from_starts(&[4, 4]), &cs);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].gates, vec![0, 1]);
        let same = single(&[(GateKind::XHalfPi, 0), (GateKind::XHalfPi, 2)], 3);
        assert!(check_park_crosstalk(&same, &TickAssignment::from_starts(&[4, 4]), &cs).is_empty());
        let plain = ArchModel::fully_connected(3);
        assert!(check_park_crosstalk(
            &clash,
            &TickAssignment::from_starts(&[4, 4]),
            &on(ConstraintFlags::all(), &plain)
        )
        .is_empty());
    }

    #[test]
    fn feasibility_aggregation() {
        let arch = two_qubit_block();
        let c = single(&[(GateKind::XHalfPi, 0), (GateKind::Msr, 1)], 3);
        let t = TickAssignment::from_starts(&[2, 2]);
        let off = is_feasible(&c, &t, &on(ConstraintFlags::none(), &arch)).unwrap();
        assert!(off.feasible);
        let all = is_feasible(&c, &t, &on(ConstraintFlags::all(), &arch)).unwrap();
        assert!(!all.feasible);
        assert_eq!(all.violations[0].constraint, ConstraintKind::BlockSameProtocol);

        let chain = single(&[(GateKind::Prep, 0), (GateKind::Msr, 0)], 3);
        let r =
            is_feasible(&chain, &TickAssignment::from_starts(&[1, 0]), &on(ConstraintFlags::none(), &arch)).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.violations[0].constraint, ConstraintKind::Precedence);

        let mut partial = TickAssignment::default();
        partial.set(0, 0);
        assert!(matches!(
            is_feasible(&chain, &partial, &on(ConstraintFlags::none(), &arch)),
            Err(Error::IncompleteAssignment(1))
        ));
    }

    #[test]
    fn violation_json_shape() {
        let arch = two_qubit_block();
        let c = single(&[(GateKind::Msr, 0), (GateKind::Msr, 1)], 3);
        let v = check_measurement_exclusivity(
            &c,
            &TickAssignment::from_starts(&[5, 5]),
            &on(ConstraintFlags::all(), &arch),
        );
        let json: serde_json::Value = serde_json::to_value(&v).unwrap();
        assert_eq!(json[0]["constraint"], "one_measurement_per_block");
        assert_eq!(json[0]["tick"], 5);
        assert_eq!(json[0]["gates"], serde_json::json!([0, 1]));
        assert_eq!(json[0]["blocks"], serde_json::json!([0]));
    }
}
