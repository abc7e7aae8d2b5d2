//! Branch-and-bound over per-tick gate subsets.
//!
//! The search walks ticks in order. At each tick it decides, gate by gate in
//! priority order, whether each ready gate starts now (binary include/exclude
//! branching enumerates every compatible subset). A tick where nothing runs
//! and nothing starts is never generated: removing such a tick keeps the
//! schedule feasible and never increases `M`, so some optimum has none.
//!
//! Pruning uses committed idles plus an admissible per-qubit bound, and a
//! transposition table keyed on the set of started gates and the residual
//! time of running ones (future cost depends on nothing else).
//!
//! The root is split into `2^split_depth` subtrees by fixing the decisions
//! for the first ready gates at tick 0. Subtrees always run with their own
//! node budget share and the greedy incumbent, then reduce in subtree order,
//! so the result does not depend on how many workers run them.

use std::collections::HashMap;

use crate::circuit::{BitSet, Circuit};
use crate::constraints::ConstraintSet;
use crate::error::Result;
use crate::par;

use super::greedy::{greedy_starts, load_running, ready_gates, UNSET};
use super::state::{Prepared, TickState};
use super::{account_dense, IdleWindowPolicy, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    /// Search nodes across all subtrees.
    pub node_budget: u64,
    /// Threads used to explore subtrees. Does not affect the result.
    pub workers: usize,
    /// Number of tick-0 decisions fixed per subtree.
    pub split_depth: usize,
    /// Entries kept in each subtree's transposition table.
    pub memo_limit: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            node_budget: 10_000_000,
            workers: par::available_workers(),
            split_depth: 3,
            memo_limit: 2_000_000,
        }
    }
}

impl ExactOptions {
    pub fn with_budget(node_budget: u64) -> Self {
        ExactOptions { node_budget, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactStats {
    pub nodes: u64,
    pub subtrees: usize,
    pub exhausted_subtrees: usize,
    pub greedy_idle_ticks: u64,
    pub certified: bool,
}

struct Search<'p, 'c> {
    p: &'p Prepared<'c>,
    start: Vec<u32>,
    placed: usize,
    placed_on_q: Vec<u32>,
    total_on_q: Vec<u32>,
    best_m: u64,
    best: Option<Vec<u32>>,
    nodes: u64,
    budget: u64,
    aborted: bool,
    memo: HashMap<Vec<u64>, u64>,
    memo_limit: usize,
    est: Vec<u32>,
    forced: Vec<bool>,
}

impl<'p, 'c> Search<'p, 'c> {
    fn new(p: &'p Prepared<'c>, incumbent: u64, budget: u64, memo_limit: usize, forced: Vec<bool>) -> Self {
        let total_on_q = p.on_qubit.iter().map(|g| g.len() as u32).collect();
        Search {
            p,
            start: vec![UNSET; p.n_gates()],
            placed: 0,
            placed_on_q: vec![0; p.n_qubits()],
            total_on_q,
            best_m: incumbent,
            best: None,
            nodes: 0,
            budget,
            aborted: false,
            memo: HashMap::new(),
            memo_limit,
            est: vec![0; p.n_gates()],
            forced,
        }
    }

    fn place(&mut self, g: usize, tick: u32) {
        self.start[g] = tick;
        self.placed += 1;
        for &q in &self.p.qubits[g] {
            self.placed_on_q[q] += 1;
        }
    }

    fn unplace(&mut self, g: usize) {
        self.start[g] = UNSET;
        self.placed -= 1;
        for &q in &self.p.qubits[g] {
            self.placed_on_q[q] -= 1;
        }
    }

    /// Admissible bound on idles charged at ticks `>= tick`.
    fn future_bound(&mut self, tick: u32) -> u64 {
        let p = self.p;
        for &g in &p.topo {
            if self.start[g] != UNSET {
                continue;
            }
            let mut e = tick;
            for &u in &p.preds[g] {
                let ready = if self.start[u] != UNSET { self.start[u] + p.dur[u] } else { self.est[u] + p.dur[u] };
                e = e.max(ready);
            }
            self.est[g] = e;
        }
        let mut bound = 0u64;
        match p.policy {
            IdleWindowPolicy::FirstToLastOp => {
                for q in 0..p.n_qubits() {
                    if self.placed_on_q[q] == self.total_on_q[q] {
                        continue;
                    }
                    if self.placed_on_q[q] == 0 {
                        bound += p.static_qubit_lb[q];
                        continue;
                    }
                    let mut busy = 0u64;
                    let mut end = tick;
                    for &g in &p.on_qubit[q] {
                        if self.start[g] == UNSET {
                            busy += u64::from(p.dur[g]);
                            end = end.max(self.est[g] + p.dur[g]);
                        } else if self.start[g] + p.dur[g] > tick {
                            busy += u64::from(self.start[g] + p.dur[g] - tick);
                        }
                    }
                    bound += u64::from(end - tick).saturating_sub(busy);
                }
            }
            IdleWindowPolicy::FullMakespan => {
                let mut end = tick;
                let mut busy = 0u64;
                for g in 0..p.n_gates() {
                    let arity = p.qubits[g].len() as u64;
                    if self.start[g] == UNSET {
                        end = end.max(self.est[g] + p.dur[g]);
                        busy += arity * u64::from(p.dur[g]);
                    } else if self.start[g] + p.dur[g] > tick {
                        end = end.max(self.start[g] + p.dur[g]);
                        busy += arity * u64::from(self.start[g] + p.dur[g] - tick);
                    }
                }
                bound = (p.n_qubits() as u64 * u64::from(end - tick)).saturating_sub(busy);
            }
        }
        bound
    }

    fn state_key(&self, tick: u32) -> Vec<u64> {
        let n = self.p.n_gates();
        let mut placed = BitSet::new(n);
        let mut running = Vec::new();
        for g in 0..n {
            if self.start[g] != UNSET {
                placed.insert(g);
                let end = self.start[g] + self.p.dur[g];
                if end > tick {
                    running.push(((g as u64) << 32) | u64::from(end - tick));
                }
            }
        }
        let mut key = placed.into_words();
        key.extend(running);
        key
    }

    fn tick_cost(&self, state: &TickState) -> u64 {
        let p = self.p;
        (0..p.n_qubits())
            .filter(|&q| !state.is_busy(q))
            .filter(|&q| match p.policy {
                IdleWindowPolicy::FirstToLastOp => self.placed_on_q[q] > 0 && self.placed_on_q[q] < self.total_on_q[q],
                IdleWindowPolicy::FullMakespan => true,
            })
            .count() as u64
    }

    fn visit_tick(&mut self, tick: u32, committed: u64) {
        if self.aborted {
            return;
        }
        if self.placed == self.p.n_gates() {
            let total = account_dense(self.p.circuit, &self.start, self.p.policy).total;
            if total < self.best_m {
                self.best_m = total;
                self.best = Some(self.start.clone());
            }
            return;
        }
        if committed + self.future_bound(tick) >= self.best_m {
            return;
        }
        let key = self.state_key(tick);
        let room = self.memo.len() < self.memo_limit;
        match self.memo.get_mut(&key) {
            Some(seen) if *seen <= committed => return,
            Some(seen) => *seen = committed,
            None if room => {
                self.memo.insert(key, committed);
            }
            None => {}
        }
        let mut state = TickState::new(self.p.n_qubits(), self.p.n_blocks);
        load_running(self.p, &self.start, tick, &mut state);
        let running = (0..self.p.n_qubits()).any(|q| state.is_busy(q));
        let ready = ready_gates(self.p, &self.start, tick, &state);
        self.choose(tick, committed, &ready, 0, running, &mut state);
    }

    fn choose(&mut self, tick: u32, committed: u64, ready: &[usize], idx: usize, any: bool, state: &mut TickState) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
        }
        if self.aborted {
            return;
        }
        if idx == ready.len() {
            if any {
                let cost = self.tick_cost(state);
                self.visit_tick(tick + 1, committed + cost);
            }
            return;
        }
        let g = ready[idx];
        let forced = (tick == 0 && idx < self.forced.len()).then(|| self.forced[idx]);
        if forced != Some(false) && state.compatible(self.p, g) {
            state.add(self.p, g);
            self.place(g, tick);
            self.choose(tick, committed, ready, idx + 1, true, state);
            self.unplace(g);
            state.remove(self.p, g);
        }
        if forced != Some(true) {
            self.choose(tick, committed, ready, idx + 1, any, state);
        }
    }
}

struct SubtreeResult {
    best: Option<(u64, Vec<u32>)>,
    nodes: u64,
    aborted: bool,
}

/// Exact minimization of `M`, or the best schedule found within the node
/// budget. `optimal` is set only when every subtree was searched to the end.
pub fn schedule_exact(
    c: &Circuit,
    cs: &ConstraintSet,
    policy: IdleWindowPolicy,
    options: &ExactOptions,
) -> Result<Schedule> {
    schedule_exact_with_stats(c, cs, policy, options).map(|(s, _)| s)
}

pub fn schedule_exact_with_stats(
    c: &Circuit,
    cs: &ConstraintSet,
    policy: IdleWindowPolicy,
    options: &ExactOptions,
) -> Result<(Schedule, ExactStats)> {
    let p = Prepared::new(c, cs, policy)?;
    let greedy = greedy_starts(&p);
    let greedy_m = account_dense(c, &greedy, policy).total;

    let root_state = TickState::new(p.n_qubits(), p.n_blocks);
    let root_ready = ready_gates(&p, &vec![UNSET; p.n_gates()], 0, &root_state);
    let depth = options.split_depth.min(root_ready.len()).min(16);
    let patterns: Vec<Vec<bool>> =
        (0..1usize << depth).map(|mask| (0..depth).map(|i| mask & (1 << (depth - 1 - i)) != 0).collect()).collect();
    let n = patterns.len() as u64;
    let budgets: Vec<u64> = (0..n).map(|i| options.node_budget / n + u64::from(i < options.node_budget % n)).collect();
    let tasks: Vec<(Vec<bool>, u64)> = patterns.into_iter().zip(budgets).collect();

    let results: Vec<SubtreeResult> = if p.n_gates() == 0 {
        vec![SubtreeResult { best: None, nodes: 0, aborted: false }]
    } else {
        par::map_with_workers(&tasks, options.workers, |(forced, budget)| {
            let mut search = Search::new(&p, greedy_m, *budget, options.memo_limit, forced.clone());
            search.visit_tick(0, 0);
            SubtreeResult {
                best: search.best.map(|b| (search.best_m, b)),
                nodes: search.nodes,
                aborted: search.aborted,
            }
        })
    };

    let mut best_m = greedy_m;
    let mut best = greedy;
    for r in &results {
        if let Some((m, starts)) = &r.best {
            if *m < best_m {
                best_m = *m;
                best = starts.clone();
            }
        }
    }
    let exhausted = results.iter().filter(|r| r.aborted).count();
    let stats = ExactStats {
        nodes: results.iter().map(|r| r.nodes).sum(),
        subtrees: results.len(),
        exhausted_subtrees: exhausted,
        greedy_idle_ticks: greedy_m,
        certified: exhausted == 0,
    };
    let schedule = Schedule::certify(c, &best, cs, policy, stats.certified)?;
    Ok((schedule, stats))
}
