//! Schedulers that minimize total idle ticks `M` under a constraint set.
//!
//! - [`schedule_greedy`]: tick-by-tick list scheduling.
//! - [`schedule_exact`]: branch-and-bound over per-tick gate subsets, seeded
//!   with the greedy incumbent, optionally fanned out over workers.
//! - [`oracle_schedule`]: exhaustive enumeration for tiny instances, used to
//!   check the other two.
//!
//! Every returned [`Schedule`] has passed [`is_feasible`] against the
//! constraint set it was built for.

mod exact;
mod export;
mod greedy;
mod oracle;
mod state;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::constraints::{is_feasible, ConstraintFlags, ConstraintSet, TickAssignment};
use crate::error::{Error, Result};

pub use exact::{schedule_exact, schedule_exact_with_stats, ExactOptions, ExactStats};
pub use export::{export_schedule, ScheduleGrid};
pub use greedy::schedule_greedy;
pub use oracle::{oracle_schedule, ORACLE_GATE_LIMIT};

/// Which ticks of a qubit count toward its idle total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdleWindowPolicy {
    /// From the start of the qubit's first gate to the end of its last.
    #[default]
    #[serde(rename = "first-last")]
    FirstToLastOp,
    /// `[0, makespan)` for every qubit.
    #[serde(rename = "makespan")]
    FullMakespan,
}

impl IdleWindowPolicy {
    pub fn label(self) -> &'static str {
        match self {
            IdleWindowPolicy::FirstToLastOp => "first-last",
            IdleWindowPolicy::FullMakespan => "makespan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdleAccount {
    pub total: u64,
    pub per_qubit: Vec<u64>,
    pub makespan: u32,
}

pub(crate) fn account_dense(c: &Circuit, starts: &[u32], policy: IdleWindowPolicy) -> IdleAccount {
    let n_q = c.n_qubits();
    let mut first = vec![u32::MAX; n_q];
    let mut last = vec![0u32; n_q];
    let mut occupied = vec![0u64; n_q];
    let mut makespan = 0u32;
    for g in c.gates() {
        let s = starts[g.id];
        let e = s + g.duration_ticks;
        makespan = makespan.max(e);
        for &q in &g.qubits {
            first[q] = first[q].min(s);
            last[q] = last[q].max(e);
            occupied[q] += u64::from(g.duration_ticks);
        }
    }
    let per_qubit: Vec<u64> = (0..n_q)
        .map(|q| {
            let window = match policy {
                IdleWindowPolicy::FirstToLastOp if first[q] == u32::MAX => 0,
                IdleWindowPolicy::FirstToLastOp => u64::from(last[q] - first[q]),
                IdleWindowPolicy::FullMakespan => u64::from(makespan),
            };
            window.saturating_sub(occupied[q])
        })
        .collect();
    IdleAccount { total: per_qubit.iter().sum(), per_qubit, makespan }
}

/// Idle ticks per qubit and in total, plus the makespan, for a complete
/// assignment.
pub fn account_idles(c: &Circuit, t: &TickAssignment, policy: IdleWindowPolicy) -> Result<IdleAccount> {
    Ok(account_dense(c, &t.to_dense(c.len())?, policy))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub assignment: TickAssignment,
    pub makespan: u32,
    #[serde(rename = "M")]
    pub idle_ticks_total: u64,
    pub idle_per_qubit: Vec<u64>,
    pub policy: IdleWindowPolicy,
    pub constraints: ConstraintFlags,
    pub optimal: bool,
}

impl Schedule {
    /// Builds a schedule from dense starts, checking it against `cs`.
    pub(crate) fn certify(
        c: &Circuit,
        starts: &[u32],
        cs: &ConstraintSet,
        policy: IdleWindowPolicy,
        optimal: bool,
    ) -> Result<Schedule> {
        let assignment = TickAssignment::from_starts(starts);
        let report = is_feasible(c, &assignment, cs)?;
        if let Some(v) = report.first_violation() {
            return Err(Error::Infeasible { constraint: v.constraint, message: v.message.clone() });
        }
        let acct = account_dense(c, starts, policy);
        Ok(Schedule {
            assignment,
            makespan: acct.makespan,
            idle_ticks_total: acct.total,
            idle_per_qubit: acct.per_qubit,
            policy,
            constraints: cs.flags,
            optimal,
        })
    }

    pub fn starts(&self) -> Vec<u32> {
        self.assignment.0.values().copied().collect()
    }

    /// `M` of the same assignment under another window policy.
    pub fn idles_under(&self, c: &Circuit, policy: IdleWindowPolicy) -> Result<IdleAccount> {
        account_idles(c, &self.assignment, policy)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, GateKind};
    use crate::layout::ArchModel;

    #[test]
    fn idle_window_examples() {
        let mut b = CircuitBuilder::new(2);
        b.push(GateKind::Prep, &[0]);
        b.push(GateKind::Msr, &[0]);
        b.push_with_duration(GateKind::Prep, &[1], 6);
        let c = b.build();
        let t = TickAssignment::from_starts(&[0, 4, 0]);
        let first_last = account_idles(&c, &t, IdleWindowPolicy::FirstToLastOp).unwrap();
        assert_eq!(first_last.per_qubit, vec![3, 0]);
        assert_eq!(first_last.makespan, 6);
        let full = account_idles(&c, &t, IdleWindowPolicy::FullMakespan).unwrap();
        assert_eq!(full.per_qubit, vec![4, 0]);
        assert_eq!(full.total, 4);
    }

    #[test]
    fn unused_qubit_has_no_window() {
        let mut b = CircuitBuilder::new(2);
        b.push(GateKind::Prep, &[0]);
        let c = b.build();
        let t = TickAssignment::from_starts(&[0]);
        assert_eq!(account_idles(&c, &t, IdleWindowPolicy::FirstToLastOp).unwrap().per_qubit, vec![0, 0]);
        assert_eq!(account_idles(&c, &t, IdleWindowPolicy::FullMakespan).unwrap().per_qubit, vec![0, 1]);
    }

    #[test]
    fn schedule_json_round_trip() {
        let mut b = CircuitBuilder::new(1);
        b.push(GateKind::Prep, &[0]);
        b.push(GateKind::Msr, &[0]);
        let c = b.build();
        let arch = ArchModel::fully_connected(1);
        let cs = ConstraintSet::new(ConstraintFlags::all(), &arch);
        let s = Schedule::certify(&c, &[0, 2], &cs, IdleWindowPolicy::FirstToLastOp, false).unwrap();
        assert_eq!(s.idle_ticks_total, 1);
        let text = s.to_json().unwrap();
        assert_eq!(Schedule::from_json(&text).unwrap(), s);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["M"], 1);
        assert_eq!(v["assignment"]["1"], 2);
        assert_eq!(v["policy"], "first-last");
    }

    #[test]
    fn certify_rejects_infeasible() {
        let mut b = CircuitBuilder::new(1);
        b.push(GateKind::Prep, &[0]);
        b.push(GateKind::Msr, &[0]);
        let c = b.build();
        let arch = ArchModel::fully_connected(1);
        let cs = ConstraintSet::new(ConstraintFlags::none(), &arch);
        assert!(matches!(
            Schedule::certify(&c, &[0, 0], &cs, IdleWindowPolicy::FirstToLastOp, false),
            Err(Error::Infeasible { .. })
        ));
    }
}
