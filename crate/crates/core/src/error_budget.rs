//! Pessimistic failure bound of a distance-3 error-correction circuit with
//! `N` gates of error `p` and `M` idle ticks of error `q`:
//!
//! ```text
//! p_circuit = M(M-1)/2 q^2 + (N p)(M q) + N(N-1)/2 p^2
//! ```
//!
//! The bound counts every pair of faults as fatal and is not clamped at 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

pub const DEFAULT_N_GATES: u64 = 108;
pub const DEFAULT_M_UNCONSTRAINED: u64 = 48;
pub const DEFAULT_M_CONSTRAINED: u64 = 95;
pub const DEFAULT_IDLE_ERRORS: [f64; 3] = [1e-4, 1e-5, 1e-6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudgetInput {
    pub n_gates: u64,
    pub idle_ticks: u64,
    pub gate_error: f64,
    pub idle_error: f64,
}

impl ErrorBudgetInput {
    pub fn new(n_gates: u64, idle_ticks: u64, gate_error: f64, idle_error: f64) -> Result<Self> {
        for (name, v) in [("gate error", gate_error), ("idle error", idle_error)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(ErrorBudgetInput { n_gates, idle_ticks, gate_error, idle_error })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetResult {
    pub p_circuit: f64,
    pub term_idle_pair: f64,
    pub term_cross: f64,
    pub term_gate_pair: f64,
    pub beneficial_vs_gate: bool,
    pub beneficial_vs_idle: bool,
    /// The raw bound is above 1 and carries no probabilistic meaning.
    pub exceeds_one: bool,
}

fn pairs(n: u64) -> f64 {
    let n = n as f64;
    n * (n - 1.0).max(0.0) / 2.0
}

pub fn circuit_error_bound(input: &ErrorBudgetInput) -> BudgetResult {
    let ErrorBudgetInput { n_gates, idle_ticks, gate_error: p, idle_error: q } = *input;
    let term_idle_pair = pairs(idle_ticks) * q * q;
    let term_gate_pair = pairs(n_gates) * p * p;
    let term_cross = (n_gates as f64 * p) * (idle_ticks as f64 * q);
    // Grouping the two pair terms first keeps the value exactly symmetric
    // under (N, p) <-> (M, q).
    let p_circuit = (term_idle_pair + term_gate_pair) + term_cross;
    BudgetResult {
        p_circuit,
        term_idle_pair,
        term_cross,
        term_gate_pair,
        beneficial_vs_gate: p_circuit < p,
        beneficial_vs_idle: p_circuit < q,
        exceeds_one: p_circuit > 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdleError {
    pub q: f64,
    /// `t_qclk > t2`: the linear estimate ran past 1 and was capped.
    pub saturated: bool,
}

/// Idle error per tick, estimated as `t_qclk / t2`.
pub fn idle_error_from_clock(t_qclk: f64, t2: f64) -> Result<IdleError> {
    if !(t2 > 0.0) {
        return Err(Error::InvalidParameter(format!("T2 must be positive, got {t2}")));
    }
    if t_qclk < 0.0 {
        return Err(Error::InvalidParameter(format!("quantum clock period must be non-negative, got {t_qclk}")));
    }
    let q = t_qclk / t2;
    Ok(if q > 1.0 { IdleError { q: 1.0, saturated: true } } else { IdleError { q, saturated: false } })
}

/// Value of the bound as gate error goes to zero.
pub fn benefit_ceiling(_n_gates: u64, idle_ticks: u64, idle_error: f64) -> f64 {
    pairs(idle_ticks) * idle_error * idle_error
}

/// Gate error at which the bound equals the bare idle error `q`, or `None`
/// when the bound is already at or above `q` with perfect gates.
pub fn crossover_gate_error(n_gates: u64, idle_ticks: u64, idle_error: f64) -> Option<f64> {
    let a = benefit_ceiling(n_gates, idle_ticks, idle_error);
    let slack = idle_error - a;
    if !(slack > 0.0) {
        return None;
    }
    let b = n_gates as f64 * idle_ticks as f64 * idle_error;
    let c = pairs(n_gates);
    if b == 0.0 && c == 0.0 {
        return None;
    }
    // Root of c p^2 + b p - slack = 0 in the cancellation-free form.
    Some(2.0 * slack / (b + (b * b + 4.0 * c * slack).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    #[serde(rename = "M")]
    pub m: u64,
    pub p: f64,
    pub p_circuit: f64,
    pub term_idle_pair: f64,
    pub term_cross: f64,
    pub term_gate_pair: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub q: f64,
    #[serde(rename = "M")]
    pub m: u64,
    pub p_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSweep {
    pub n_gates: u64,
    pub rows: Vec<SweepRow>,
    pub crossovers: Vec<Crossover>,
}

/// Log-spaced gate-error grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..points).map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64)).collect()
        }
    }
}

pub fn default_gate_error_grid() -> Vec<f64> {
    log_grid(1e-7, 1e-2, 51)
}

/// One curve per `(q, M)`, ordered by `q` then `M` as given; rows within a
/// curve follow `p_grid`.
pub fn failure_bound_sweep(n_gates: u64, idle_ticks: &[u64], q_list: &[f64], p_grid: &[f64]) -> Result<FailureSweep> {
    if p_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("gate-error grid must be sorted ascending".into()));
    }
    let curves: Vec<(f64, u64)> = q_list.iter().flat_map(|&q| idle_ticks.iter().map(move |&m| (q, m))).collect();
    for &(q, _) in &curves {
        ErrorBudgetInput::new(n_gates, 0, 0.0, q)?;
    }
    for &p in p_grid {
        ErrorBudgetInput::new(n_gates, 0, p, 0.0)?;
    }
    let per_curve = par::map(&curves, |&(q, m)| {
        p_grid
            .iter()
            .map(|&p| {
                let r = circuit_error_bound(&ErrorBudgetInput { n_gates, idle_ticks: m, gate_error: p, idle_error: q });
                SweepRow {
                    q,
                    m,
                    p,
                    p_circuit: r.p_circuit,
                    term_idle_pair: r.term_idle_pair,
                    term_cross: r.term_cross,
                    term_gate_pair: r.term_gate_pair,
                }
            })
            .collect::<Vec<_>>()
    });
    let crossovers =
        curves.iter().map(|&(q, m)| Crossover { q, m, p_star: crossover_gate_error(n_gates, m, q) }).collect();
    Ok(FailureSweep { n_gates, rows: per_curve.into_iter().flatten().collect(), crossovers })
}

impl FailureSweep {
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn crossovers_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.crossovers)?)
    }
}
