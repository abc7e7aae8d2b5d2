use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use qecarch::control::{
    direct_line_count, line_budget_total, min_qclk, pipeline_feasible, serial_line_sweep, serial_lines_required,
    staging_feasible, write_serial_line_sweep, LineBudget, StageReport,
};
use qecarch::error_budget::{default_gate_error_grid, failure_bound_sweep, FailureSweep, DEFAULT_IDLE_ERRORS};
use qecarch::gate_accuracy::{default_rotation_error_table, write_rotation_error_table, RotationErrorRow};
use qecarch::layout::{default_routing_nodes, routing_table, write_routing_table, RoutingRow, LINES_PER_QUBIT};
use qecarch::scheduler::{export_schedule, schedule_exact_with_stats, ORACLE_GATE_LIMIT};
use qecarch::{
    census, generate_bs9_21_half_round, oracle_schedule, schedule_greedy, validate_circuit, Circuit, ConstraintFlags,
    ConstraintSet, GateCensus, IdleWindowPolicy,
};

use crate::args::GenArgs;
use crate::config::RunConfig;
use crate::{read_text, write_output, CliError, CliResult};

pub const REFERENCE_M_UNCONSTRAINED: u64 = 48;
pub const REFERENCE_M_CONSTRAINED: u64 = 95;
const AGREEMENT_TOLERANCE: f64 = 0.25;

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("output types serialize");
    s.push('\n');
    s.into_bytes()
}

pub struct GenOutcome {
    pub path: PathBuf,
    pub census: GateCensus,
}

impl GenOutcome {
    pub fn summary(&self) -> String {
        format!("{}\nwrote {}\n", self.census.summary_line(), self.path.display())
    }
}

pub fn cmd_gen(a: &GenArgs) -> CliResult<GenOutcome> {
    let circuit = match (&a.input, a.bs9) {
        (Some(p), _) => Circuit::from_json(&read_text(p)?).map_err(|e| CliError::core(p.display().to_string(), e))?,
        (None, true) => generate_bs9_21_half_round(),
        (None, false) => return Err(CliError::Usage("gen needs --bs9 or --in FILE".into())),
    };
    validate_circuit(&circuit).into_result().map_err(|e| CliError::core("circuit", e))?;
    let census = census(&circuit);
    let text = circuit.to_json().map_err(|e| CliError::core("circuit", e))?;
    let path = write_output(&a.out, "circuit.json", format!("{text}\n").as_bytes())?;
    write_output(&a.out, "census.json", &json(&census))?;
    Ok(GenOutcome { path, census })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub constraints: &'static str,
    pub greedy_m: u64,
    pub exact_m: u64,
    pub makespan: u32,
    pub optimal: bool,
    pub nodes: u64,
    /// `M` of the exact schedule re-counted under each window policy.
    pub m_first_last: u64,
    pub m_makespan: u64,
    pub oracle_m: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Agreement {
    pub constraints: &'static str,
    pub policy: &'static str,
    pub m: u64,
    pub reference: u64,
    pub relative_deviation: f64,
    pub within_25_percent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleSummary {
    pub circuit: String,
    pub arch: String,
    pub gates: usize,
    pub policy: &'static str,
    pub budget_nodes: u64,
    pub runs: Vec<RunRecord>,
    /// Constrained over unconstrained exact `M`, when both ran.
    pub ratio: Option<f64>,
    pub reference_m_unconstrained: u64,
    pub reference_m_constrained: u64,
    pub agreement: Vec<Agreement>,
}

impl ScheduleSummary {
    pub fn run(&self, constrained: bool) -> Option<&RunRecord> {
        let tag = if constrained { "on" } else { "off" };
        self.runs.iter().find(|r| r.constraints == tag)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "circuit: {} ({} gates), arch: {}", self.circuit, self.gates, self.arch);
        let _ = writeln!(s, "policy: {}, budget: {} nodes", self.policy, self.budget_nodes);
        for r in &self.runs {
            let cert = if r.optimal { "certified" } else { "not certified" };
            let _ = write!(
                s,
                "constraints {:>3}: M = {} (greedy {}), makespan {}, optimal: {}, first-last {} / makespan {}",
                r.constraints, r.exact_m, r.greedy_m, r.makespan, cert, r.m_first_last, r.m_makespan
            );
            if let Some(o) = r.oracle_m {
                let _ = write!(s, ", oracle {o}");
            }
            s.push('\n');
        }
        if let Some(ratio) = self.ratio {
            let _ = writeln!(s, "ratio constrained/unconstrained: {ratio:.3}");
        }
        let _ = writeln!(
            s,
            "reference targets: unconstrained {}, constrained {}",
            self.reference_m_unconstrained, self.reference_m_constrained
        );
        for a in &self.agreement {
            let _ = writeln!(
                s,
                "  {} / {}: {} vs {} ({:+.1}%){}",
                a.constraints,
                a.policy,
                a.m,
                a.reference,
                100.0 * a.relative_deviation,
                if a.within_25_percent { "" } else { " outside 25%" }
            );
        }
        s
    }
}

fn other_policy(p: IdleWindowPolicy) -> IdleWindowPolicy {
    match p {
        IdleWindowPolicy::FirstToLastOp => IdleWindowPolicy::FullMakespan,
        IdleWindowPolicy::FullMakespan => IdleWindowPolicy::FirstToLastOp,
    }
}

pub fn cmd_schedule(cfg: &RunConfig) -> CliResult<ScheduleSummary> {
    let c = &cfg.circuit;
    let mut runs = Vec::new();
    for &on in &cfg.constraint_settings {
        let tag = if on { "on" } else { "off" };
        let flags = if on { ConstraintFlags::all() } else { ConstraintFlags::none() };
        let cs = ConstraintSet::new(flags, &cfg.arch);
        let ctx = || format!("constraints {tag}");
        let greedy = schedule_greedy(c, &cs, cfg.policy).map_err(|e| CliError::core(ctx(), e))?;
        let (exact, stats) =
            schedule_exact_with_stats(c, &cs, cfg.policy, &cfg.exact).map_err(|e| CliError::core(ctx(), e))?;
        let oracle_m = if c.len() <= ORACLE_GATE_LIMIT {
            let horizon = c.gates().iter().map(|g| g.duration_ticks).sum();
            Some(oracle_schedule(c, &cs, cfg.policy, horizon).map_err(|e| CliError::core(ctx(), e))?.idle_ticks_total)
        } else {
            None
        };
        let other = exact.idles_under(c, other_policy(cfg.policy)).map_err(|e| CliError::core(ctx(), e))?.total;
        let (m_first_last, m_makespan) = match cfg.policy {
            IdleWindowPolicy::FirstToLastOp => (exact.idle_ticks_total, other),
            IdleWindowPolicy::FullMakespan => (other, exact.idle_ticks_total),
        };

        let grid = export_schedule(&exact, c);
        write_output(&cfg.out, &format!("schedule_{tag}.json"), &json(&exact))?;
        write_output(&cfg.out, &format!("greedy_{tag}.json"), &json(&greedy))?;
        write_output(&cfg.out, &format!("grid_{tag}.csv"), grid.to_csv().as_bytes())?;
        write_output(&cfg.out, &format!("grid_{tag}.json"), format!("{}\n", grid.to_json()).as_bytes())?;

        runs.push(RunRecord {
            constraints: tag,
            greedy_m: greedy.idle_ticks_total,
            exact_m: exact.idle_ticks_total,
            makespan: exact.makespan,
            optimal: exact.optimal,
            nodes: stats.nodes,
            m_first_last,
            m_makespan,
            oracle_m,
        });
    }

    let off = runs.iter().find(|r| r.constraints == "off");
    let on = runs.iter().find(|r| r.constraints == "on");
    let ratio = match (off, on) {
        (Some(off), Some(on)) if off.exact_m > 0 => Some(on.exact_m as f64 / off.exact_m as f64),
        _ => None,
    };
    let mut agreement = Vec::new();
    for r in &runs {
        let reference = if r.constraints == "on" { REFERENCE_M_CONSTRAINED } else { REFERENCE_M_UNCONSTRAINED };
        for (policy, m) in [("first-last", r.m_first_last), ("makespan", r.m_makespan)] {
            let dev = (m as f64 - reference as f64) / reference as f64;
            agreement.push(Agreement {
                constraints: r.constraints,
                policy,
                m,
                reference,
                relative_deviation: dev,
                within_25_percent: dev.abs() <= AGREEMENT_TOLERANCE,
            });
        }
    }
    let summary = ScheduleSummary {
        circuit: cfg.circuit_source.clone(),
        arch: cfg.arch_source.clone(),
        gates: c.len(),
        policy: cfg.policy.label(),
        budget_nodes: cfg.exact.node_budget,
        runs,
        ratio,
        reference_m_unconstrained: REFERENCE_M_UNCONSTRAINED,
        reference_m_constrained: REFERENCE_M_CONSTRAINED,
        agreement,
    };
    write_output(&cfg.out, "schedule_summary.json", &json(&summary))?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub n_qubits: u32,
    pub lines_per_qubit: u32,
    pub switch_lines: u32,
    pub direct_lines: u32,
    pub line_budget: LineBudget,
    pub multiplexed_lines: u32,
    pub within_fridge_limit: bool,
    pub word_bits: u32,
    pub t_clk_ns: f64,
    pub t_qclk_ns: f64,
    pub data_lines: u32,
    pub min_qclk_ns: f64,
    /// `None` when the quantum period holds no whole classical cycle.
    pub serial_lines_required: Option<u32>,
    pub pipeline_feasible: bool,
    pub stages: Vec<StageReport>,
}

impl AuditReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "direct lines: {} ({} qubits x {} + {} switch lines)",
            self.direct_lines, self.n_qubits, self.lines_per_qubit, self.switch_lines
        );
        let verdict = if self.within_fridge_limit { "within" } else { "exceeds" };
        let _ = writeln!(
            s,
            "multiplexed lines: {} ({verdict} limit {})",
            self.multiplexed_lines, self.line_budget.fridge_limit
        );
        let _ = writeln!(s, "control word: {} bits", self.word_bits);
        let _ = writeln!(
            s,
            "min T_Qclk: {} ns on {} data lines; T_Qclk {} ns -> pipeline {}",
            self.min_qclk_ns,
            self.data_lines,
            self.t_qclk_ns,
            if self.pipeline_feasible { "feasible" } else { "infeasible" }
        );
        for st in &self.stages {
            let _ = writeln!(
                s,
                "stage {}: demand {:e} W, budget {} -> {}",
                st.stage.label(),
                st.demand,
                st.cooling_budget.map_or("none".to_string(), |b| format!("{b:e} W")),
                if st.feasible { "feasible" } else { "infeasible" }
            );
        }
        s
    }
}

fn ns(t: f64) -> f64 {
    (t * 1e15).round() / 1e6
}

pub(crate) fn audit(cfg: &RunConfig) -> CliResult<AuditReport> {
    let clock = cfg.control.clock();
    let n_qubits = cfg.arch.n_qubits() as u32;
    let switch_lines = cfg.arch.n_cphase_switches() as u32;
    let total = line_budget_total(&cfg.control.lines);
    let serial = match serial_lines_required(clock.word_bits, clock.t_qclk, clock.t_clk) {
        Ok(n) => Some(n),
        Err(qecarch::Error::InfeasibleClock) => None,
        Err(e) => return Err(CliError::core("clock settings", e)),
    };
    Ok(AuditReport {
        n_qubits,
        lines_per_qubit: LINES_PER_QUBIT,
        switch_lines,
        direct_lines: direct_line_count(n_qubits, LINES_PER_QUBIT, switch_lines),
        line_budget: cfg.control.lines,
        multiplexed_lines: total.total,
        within_fridge_limit: total.within_limit,
        word_bits: clock.word_bits,
        t_clk_ns: ns(clock.t_clk),
        t_qclk_ns: ns(clock.t_qclk),
        data_lines: clock.data_lines,
        min_qclk_ns: ns(
            min_qclk(clock.word_bits, clock.data_lines, clock.t_clk).map_err(|e| CliError::core("clock", e))?
        ),
        serial_lines_required: serial,
        pipeline_feasible: pipeline_feasible(&clock).map_err(|e| CliError::core("clock", e))?,
        stages: staging_feasible(&cfg.control.stages).map_err(|e| CliError::core("stages", e))?,
    })
}

pub fn cmd_audit(cfg: &RunConfig) -> CliResult<AuditReport> {
    let report = audit(cfg)?;
    write_output(&cfg.out, "audit.json", &json(&report))?;
    Ok(report)
}

/// Upper end of the `t_qclk / t_clk` ratio sweep.
pub const SERIAL_SWEEP_MAX_RATIO: u32 = 64;

pub struct SweepOutcome {
    pub files: Vec<PathBuf>,
    pub serial_lines: Vec<qecarch::control::SerialLinePoint>,
    pub failure: FailureSweep,
    pub routing: Vec<RoutingRow>,
    pub rotation: Vec<RotationErrorRow>,
}

impl SweepOutcome {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for f in &self.files {
            let _ = writeln!(s, "wrote {}", f.display());
        }
        s
    }
}

type SweepData = (Vec<qecarch::control::SerialLinePoint>, FailureSweep, Vec<RoutingRow>, Vec<RotationErrorRow>);

pub(crate) fn sweep_data(cfg: &RunConfig, m_values: &[u64]) -> CliResult<SweepData> {
    let clock = cfg.control.clock();
    let serial = serial_line_sweep(clock.word_bits, clock.t_clk, 1..=SERIAL_SWEEP_MAX_RATIO)
        .map_err(|e| CliError::core("serial-line sweep", e))?;
    let n_gates = census(&cfg.circuit).total() as u64;
    let failure = failure_bound_sweep(n_gates, m_values, &DEFAULT_IDLE_ERRORS, &default_gate_error_grid())
        .map_err(|e| CliError::core("failure-bound sweep", e))?;
    let routing = routing_table(&default_routing_nodes());
    let rotation = default_rotation_error_table(&cfg.exchange).map_err(|e| CliError::core("rotation errors", e))?;
    Ok((serial, failure, routing, rotation))
}

pub fn cmd_sweep(cfg: &RunConfig, m_values: &[u64]) -> CliResult<SweepOutcome> {
    if m_values.is_empty() {
        return Err(CliError::Usage("--m-values needs at least one value".into()));
    }
    let (serial, failure, routing, rotation) = sweep_data(cfg, m_values)?;
    let mut files = Vec::new();

    let mut buf = Vec::new();
    write_serial_line_sweep(&serial, &mut buf).map_err(|e| CliError::core("serial_lines.csv", e))?;
    files.push(write_output(&cfg.out, "serial_lines.csv", &buf)?);

    let mut buf = Vec::new();
    failure.write_csv(&mut buf).map_err(|e| CliError::core("failure_bound.csv", e))?;
    files.push(write_output(&cfg.out, "failure_bound.csv", &buf)?);
    files.push(write_output(&cfg.out, "crossovers.json", &json(&failure.crossovers))?);

    let mut buf = Vec::new();
    write_routing_table(&routing, &mut buf).map_err(|e| CliError::core("routing_capacity.csv", e))?;
    files.push(write_output(&cfg.out, "routing_capacity.csv", &buf)?);

    let mut buf = Vec::new();
    write_rotation_error_table(&rotation, &mut buf).map_err(|e| CliError::core("rotation_errors.csv", e))?;
    files.push(write_output(&cfg.out, "rotation_errors.csv", &buf)?);

    Ok(SweepOutcome { files, serial_lines: serial, failure, routing, rotation })
}
