//! Exhaustive reference scheduler for tiny instances.
//!
//! Enumerates start vectors in lexicographic order (gate 0 outermost),
//! discarding partial vectors that already break a dependency or overlap on
//! a qubit. Each complete vector is judged by [`is_feasible`] and costed by
//! [`account_idles`], so the oracle shares no search code with the other
//! schedulers.

use crate::circuit::{validate_circuit, Circuit, GateKind};
use crate::constraints::{is_feasible, ConstraintSet, TickAssignment};
use crate::error::{Error, Result};

use super::{account_idles, IdleWindowPolicy, Schedule};

pub const ORACLE_GATE_LIMIT: usize = 10;

struct Enumeration<'a> {
    c: &'a Circuit,
    cs: &'a ConstraintSet<'a>,
    policy: IdleWindowPolicy,
    horizon: u32,
    checks: Vec<Vec<(usize, bool)>>,
    starts: Vec<u32>,
    best: Option<(u64, Vec<u32>)>,
}

impl Enumeration<'_> {
    fn recurse(&mut self, g: usize) -> Result<()> {
        if g == self.c.len() {
            let t = TickAssignment::from_starts(&self.starts);
            if !is_feasible(self.c, &t, self.cs)?.feasible {
                return Ok(());
            }
            let m = account_idles(self.c, &t, self.policy)?.total;
            if self.best.as_ref().is_none_or(|(b, _)| m < *b) {
                self.best = Some((m, self.starts.clone()));
            }
            return Ok(());
        }
        let dur = self.c.gate(g).duration_ticks;
        if dur > self.horizon {
            return Ok(());
        }
        for s in 0..=self.horizon - dur {
            let ok = self.checks[g].iter().all(|&(h, is_dep_into_g)| {
                let sh = self.starts[h];
                let dh = self.c.gate(h).duration_ticks;
                if is_dep_into_g {
                    s >= sh + dh
                } else {
                    // h -> g is not an edge: either g precedes h, or they
                    // merely share a qubit.
                    s + dur <= sh || sh + dh <= s
                }
            });
            if ok {
                self.starts[g] = s;
                self.recurse(g + 1)?;
            }
        }
        Ok(())
    }
}

/// Minimum-`M` schedule by exhaustive search over starts in
/// `[0, horizon - duration]`; ties go to the lexicographically smallest start
/// vector. Always `optimal`.
pub fn oracle_schedule(c: &Circuit, cs: &ConstraintSet, policy: IdleWindowPolicy, horizon: u32) -> Result<Schedule> {
    if c.len() > ORACLE_GATE_LIMIT {
        return Err(Error::InstanceTooLarge { gates: c.len(), limit: ORACLE_GATE_LIMIT });
    }
    validate_circuit(c).into_result()?;
    for g in c.gates() {
        if g.kind == GateKind::CPhase && !cs.arch.can_couple(g.qubits[0], g.qubits[1]) {
            return Err(Error::Unschedulable { gate: g.id, reason: "not a CPHASE neighbor pair".into() });
        }
    }

    // For each gate g, the already-placed gates h < g to test against:
    // (h, true) for an edge h -> g, (h, false) for an edge g -> h or a
    // shared qubit.
    let n = c.len();
    let mut checks = vec![Vec::new(); n];
    for (g, list) in checks.iter_mut().enumerate() {
        for h in 0..g {
            if c.deps().contains(&(h, g)) {
                list.push((h, true));
            } else if c.deps().contains(&(g, h)) || c.gate(g).qubits.iter().any(|q| c.gate(h).qubits.contains(q)) {
                list.push((h, false));
            }
        }
    }
    let mut run = Enumeration { c, cs, policy, horizon, checks, starts: vec![0; n], best: None };
    run.recurse(0)?;
    match run.best {
        Some((_, starts)) => Schedule::certify(c, &starts, cs, policy, true),
        None if n == 0 => Schedule::certify(c, &[], cs, policy, true),
        None => Err(Error::HorizonTooSmall(horizon)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;
    use crate::constraints::ConstraintFlags;
    use crate::layout::ArchModel;

    #[test]
    fn independent_gates_start_together() {
        let mut b = CircuitBuilder::new(2);
        b.push(GateKind::Prep, &[0]);
        b.push(GateKind::Prep, &[1]);
        let arch = ArchModel::fully_connected(2);
        let s = oracle_schedule(
            &b.build(),
            &ConstraintSet::new(ConstraintFlags::none(), &arch),
            IdleWindowPolicy::FirstToLastOp,
            3,
        )
        .unwrap();
        assert_eq!(s.starts(), vec![0, 0]);
        assert_eq!(s.idle_ticks_total, 0);
        assert!(s.optimal);
    }

    #[test]
    fn shared_block_serializes_different_kinds() {
        // Two gates on a shared block, each qubit's window spans both ticks
        // only if we charge the second tick to the first qubit.
        let mut b = CircuitBuilder::new(2);
        b.push(GateKind::XHalfPi, &[0]);
        b.push(GateKind::ZHalfPi, &[1]);
        let arch = ArchModel::new(2, vec![vec![0, 1]], 0, [], Default::default()).unwrap();
        let cs = ConstraintSet::new(ConstraintFlags::all(), &arch);
        let c = b.build();
        let s = oracle_schedule(&c, &cs, IdleWindowPolicy::FirstToLastOp, 3).unwrap();
        assert_eq!(s.makespan, 2);
        assert_eq!(s.idle_ticks_total, 0);
        let full = oracle_schedule(&c, &cs, IdleWindowPolicy::FullMakespan, 3).unwrap();
        assert_eq!(full.idle_ticks_total, 2);
        assert_eq!(full.idle_per_qubit, vec![1, 1]);
    }

    #[test]
    fn chain_of_three() {
        let mut b = CircuitBuilder::new(1);
        b.push(GateKind::Prep, &[0]);
        b.push(GateKind::XHalfPi, &[0]);
        b.push(GateKind::Msr, &[0]);
        let arch = ArchModel::fully_connected(1);
        let s = oracle_schedule(
            &b.build(),
            &ConstraintSet::new(ConstraintFlags::all(), &arch),
            IdleWindowPolicy::FirstToLastOp,
            5,
        )
        .unwrap();
        assert_eq!((s.idle_ticks_total, s.makespan), (0, 3));
    }

    #[test]
    fn guards() {
        let mut b = CircuitBuilder::new(1);
        for _ in 0..11 {
            b.push(GateKind::Prep, &[0]);
        }
        let arch = ArchModel::fully_connected(1);
        let cs = ConstraintSet::new(ConstraintFlags::none(), &arch);
        assert!(matches!(
            oracle_schedule(&b.build(), &cs, IdleWindowPolicy::FirstToLastOp, 20),
            Err(Error::InstanceTooLarge { .. })
        ));
        let mut b = CircuitBuilder::new(1);
        b.push(GateKind::Prep, &[0]);
        b.push(GateKind::Msr, &[0]);
        assert!(matches!(
            oracle_schedule(&b.build(), &cs, IdleWindowPolicy::FirstToLastOp, 1),
            Err(Error::HorizonTooSmall(1))
        ));
    }
}
