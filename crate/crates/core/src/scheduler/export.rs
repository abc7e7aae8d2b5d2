use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind};

use super::{IdleWindowPolicy, Schedule};

/// Qubit-by-tick rendering of a schedule. A cell holds the label of the gate
/// occupying it, `"idle"` inside the qubit's accounting window, or `""`
/// outside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleGrid {
    pub policy: IdleWindowPolicy,
    pub ticks: u32,
    pub rows: Vec<Vec<String>>,
}

pub fn export_schedule(s: &Schedule, c: &Circuit) -> ScheduleGrid {
    let ticks = s.makespan as usize;
    let mut rows = vec![vec![String::new(); ticks]; c.n_qubits()];
    let mut first = vec![usize::MAX; c.n_qubits()];
    let mut last = vec![0usize; c.n_qubits()];
    for g in c.gates() {
        let start = s.assignment.start(g.id).unwrap_or(0) as usize;
        let end = start + g.duration_ticks as usize;
        for &q in &g.qubits {
            first[q] = first[q].min(start);
            last[q] = last[q].max(end);
            for cell in &mut rows[q][start..end] {
                *cell = g.kind.label().to_string();
            }
        }
    }
    for (q, row) in rows.iter_mut().enumerate() {
        let window = match s.policy {
            IdleWindowPolicy::FirstToLastOp if first[q] == usize::MAX => 0..0,
            IdleWindowPolicy::FirstToLastOp => first[q]..last[q],
            IdleWindowPolicy::FullMakespan => 0..ticks,
        };
        for cell in &mut row[window] {
            if cell.is_empty() {
                *cell = GateKind::Idle.label().to_string();
            }
        }
    }
    ScheduleGrid { policy: s.policy, ticks: s.makespan, rows }
}

impl ScheduleGrid {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("qubit");
        for t in 0..self.ticks {
            out.push_str(&format!(",{t}"));
        }
        out.push('\n');
        for (q, row) in self.rows.iter().enumerate() {
            out.push_str(&format!("q{q}"));
            for cell in row {
                out.push(',');
                out.push_str(cell);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid serializes")
    }

    /// Idle cells per row; equals the schedule's `idle_per_qubit`.
    pub fn idle_counts(&self) -> Vec<u64> {
        let idle = GateKind::Idle.label();
        self.rows.iter().map(|r| r.iter().filter(|c| c.as_str() == idle).count() as u64).collect()
    }
}
