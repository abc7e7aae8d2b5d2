use crate::circuit::Circuit;
use crate::constraints::ConstraintSet;
use crate::error::Result;

use super::state::{Prepared, TickState};
use super::{IdleWindowPolicy, Schedule};

pub(crate) const UNSET: u32 = u32::MAX;

/// Gates whose predecessors have all finished by `tick` and whose qubits are
/// free, in priority order.
pub(super) fn ready_gates(p: &Prepared, start: &[u32], tick: u32, state: &TickState) -> Vec<usize> {
    let mut ready: Vec<usize> = (0..p.n_gates())
        .filter(|&g| start[g] == UNSET)
        .filter(|&g| p.preds[g].iter().all(|&u| start[u] != UNSET && start[u] + p.dur[u] <= tick))
        .filter(|&g| p.qubits[g].iter().all(|&q| !state.is_busy(q)))
        .collect();
    p.sort_by_priority(&mut ready);
    ready
}

/// Loads gates still running at `tick` into `state`.
pub(super) fn load_running(p: &Prepared, start: &[u32], tick: u32, state: &mut TickState) {
    state.clear();
    for (g, &s) in start.iter().enumerate() {
        if s != UNSET && s <= tick && tick < s + p.dur[g] {
            state.add(p, g);
        }
    }
}

pub(super) fn greedy_starts(p: &Prepared) -> Vec<u32> {
    let n = p.n_gates();
    let mut start = vec![UNSET; n];
    let mut state = TickState::new(p.n_qubits(), p.n_blocks);
    let mut placed = 0;
    let mut tick = 0u32;
    while placed < n {
        load_running(p, &start, tick, &mut state);
        for g in ready_gates(p, &start, tick, &state) {
            if state.compatible(p, g) {
                state.add(p, g);
                start[g] = tick;
                placed += 1;
            }
        }
        tick += 1;
    }
    start
}

/// List scheduling: each tick takes a maximal compatible set of ready gates,
/// longest remaining critical path first, ties to the lower gate id.
pub fn schedule_greedy(c: &Circuit, cs: &ConstraintSet, policy: IdleWindowPolicy) -> Result<Schedule> {
    let p = Prepared::new(c, cs, policy)?;
    let starts = greedy_starts(&p);
    Schedule::certify(c, &starts, cs, policy, false)
}
