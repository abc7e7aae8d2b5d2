use std::fmt::Write as _;
use std::path::PathBuf;

use qecarch::control::{min_qclk, serial_lines_required};
use qecarch::error_budget::{benefit_ceiling, circuit_error_bound, crossover_gate_error, ErrorBudgetInput};
use qecarch::{census, GateKind};

use crate::commands::{audit, cmd_schedule, sweep_data, REFERENCE_M_CONSTRAINED, REFERENCE_M_UNCONSTRAINED};
use crate::config::RunConfig;
use crate::{write_output, CliResult};

const REFERENCE_CENSUS: [(GateKind, usize); 5] = [
    (GateKind::Prep, 12),
    (GateKind::XHalfPi, 42),
    (GateKind::ZHalfPi, 18),
    (GateKind::CPhase, 24),
    (GateKind::Msr, 12),
];
const REFERENCE_ROUTING: [u32; 5] = [0, 1, 2, 3, 5];
/// (J µeV, δV µV, ΔJ eV, Z error rad, gate time ns)
const REFERENCE_ROTATION: [(f64, f64, f64, f64, f64); 16] = [
    (0.069, 1.0, 2.379e-11, 1.0845e-3, 30.0),
    (0.069, 10.0, 2.383e-10, 1.086e-2, 30.0),
    (0.069, 100.0, 2.418e-9, 1.1019e-1, 30.0),
    (0.069, 1000.0, 2.735e-8, 1.2464, 30.0),
    (0.5, 1.0, 1.873e-10, 1.1771e-3, 4.13),
    (0.5, 10.0, 1.878e-9, 1.1799e-2, 4.13),
    (0.5, 100.0, 1.923e-8, 1.2082e-1, 4.13),
    (0.5, 1000.0, 2.469e-7, 1.5515, 4.13),
    (1.0, 1.0, 4.757e-10, 1.4945e-3, 2.06),
    (1.0, 10.0, 4.771e-9, 1.4988e-2, 2.06),
    (1.0, 100.0, 4.910e-8, 1.5427e-1, 2.06),
    (1.0, 1000.0, 6.756e-7, 2.1225, 2.06),
    (2.0, 1.0, 1.186e-9, 1.8637e-3, 1.03),
    (2.0, 10.0, 1.191e-8, 1.8701e-2, 1.03),
    (2.0, 100.0, 1.234e-7, 1.938e-1, 1.03),
    (2.0, 1000.0, 1.879e-6, 2.9518, 1.03),
];
const REFERENCE_IDLE_RATIO: f64 = 2.0;
const REFERENCE_CEILING_RATIO: f64 = 3.0;
const REFERENCE_CROSSOVER_RATIO: f64 = 5.0;
const Q_FOR_RATIOS: f64 = 1e-4;

pub struct ReportOutcome {
    pub path: PathBuf,
    pub markdown: String,
    pub discrepancies: usize,
}

impl ReportOutcome {
    pub fn summary(&self) -> String {
        format!("wrote {} ({} flagged discrepancies)\n", self.path.display(), self.discrepancies)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b) / b
    }
}

struct Doc {
    text: String,
    flagged: usize,
}

impl Doc {
    fn status(&mut self, ok: bool) -> &'static str {
        if ok {
            "ok"
        } else {
            self.flagged += 1;
            "**discrepancy**"
        }
    }
}

pub fn cmd_report(cfg: &RunConfig) -> CliResult<ReportOutcome> {
    let mut d = Doc { text: String::new(), flagged: 0 };
    let cns = census(&cfg.circuit);
    let sched = cmd_schedule(cfg)?;
    let audit = audit(cfg)?;
    let m_off = sched.run(false).map(|r| r.exact_m);
    let m_on = sched.run(true).map(|r| r.exact_m);
    let (_, _, routing, rotation) = sweep_data(cfg, &[REFERENCE_M_UNCONSTRAINED, REFERENCE_M_CONSTRAINED])?;
    let w = &mut d.text;
    let _ = writeln!(w, "# qecarch report\n");
    let _ = writeln!(w, "- circuit: {} ({} gates)", sched.circuit, sched.gates);
    let _ = writeln!(w, "- architecture: {}", sched.arch);
    let _ = writeln!(w, "- idle window: {}", sched.policy);
    let _ = writeln!(w, "- exact-search budget: {} nodes\n", sched.budget_nodes);

    let _ = writeln!(d.text, "## Gate census\n\n| kind | computed | reference | status |\n|---|---|---|---|");
    for (kind, reference) in REFERENCE_CENSUS {
        let got = cns.get(kind);
        let st = d.status(got == reference);
        let _ = writeln!(d.text, "| {} | {got} | {reference} | {st} |", kind.label());
    }
    let st = d.status(cns.total() == 108);
    let _ = writeln!(d.text, "| total | {} | 108 | {st} |\n", cns.total());

    let _ = writeln!(
        d.text,
        "## Idle ticks\n\nReference counts come from a circuit and idle-window convention that are not known exactly; \
         agreement within 25% is reported, not required.\n"
    );
    let _ = writeln!(
        d.text,
        "| constraints | M first-last | M makespan | greedy M | certified | reference |\n|---|---|---|---|---|---|"
    );
    for r in &sched.runs {
        let reference = if r.constraints == "on" { REFERENCE_M_CONSTRAINED } else { REFERENCE_M_UNCONSTRAINED };
        let _ = writeln!(
            d.text,
            "| {} | {} | {} | {} | {} | {reference} |",
            r.constraints, r.m_first_last, r.m_makespan, r.greedy_m, r.optimal
        );
    }
    d.text.push('\n');
    for a in &sched.agreement {
        let st = d.status(a.within_25_percent);
        let _ = writeln!(
            d.text,
            "- {} / {}: {} vs {} ({:+.1}%), {st}",
            a.constraints,
            a.policy,
            a.m,
            a.reference,
            100.0 * a.relative_deviation
        );
    }
    if let Some(ratio) = sched.ratio {
        let st = d.status((1.5..=2.5).contains(&ratio));
        let _ = writeln!(
            d.text,
            "- constrained/unconstrained ratio: {ratio:.3} (reference about {REFERENCE_IDLE_RATIO}, accepted range 1.5 to 2.5), {st}"
        );
    }
    d.text.push('\n');

    let n = cns.total() as u64;
    let _ = writeln!(
        d.text,
        "## Failure bound\n\nN = {n}, p = 0, q = {Q_FOR_RATIOS:e}.\n\n| M | p_circuit | crossover p* |\n|---|---|---|"
    );
    let mut ms = vec![REFERENCE_M_UNCONSTRAINED, REFERENCE_M_CONSTRAINED];
    ms.extend(m_off);
    ms.extend(m_on);
    ms.sort();
    ms.dedup();
    for m in ms {
        let r = circuit_error_bound(&ErrorBudgetInput {
            n_gates: n,
            idle_ticks: m,
            gate_error: 0.0,
            idle_error: Q_FOR_RATIOS,
        });
        let p_star = crossover_gate_error(n, m, Q_FOR_RATIOS).map_or("none".to_string(), |p| format!("{p:.4e}"));
        let _ = writeln!(d.text, "| {m} | {:.4e} | {p_star} |", r.p_circuit);
    }
    let ceiling = benefit_ceiling(n, REFERENCE_M_CONSTRAINED, Q_FOR_RATIOS)
        / benefit_ceiling(n, REFERENCE_M_UNCONSTRAINED, Q_FOR_RATIOS);
    let st = d.status((ceiling - REFERENCE_CEILING_RATIO).abs() / REFERENCE_CEILING_RATIO <= 0.1);
    let _ = writeln!(
        d.text,
        "\n- ceiling ratio M=95 vs M=48: {ceiling:.3} (stated: about {REFERENCE_CEILING_RATIO}), {st}"
    );
    let cross = match (
        crossover_gate_error(n, REFERENCE_M_UNCONSTRAINED, Q_FOR_RATIOS),
        crossover_gate_error(n, REFERENCE_M_CONSTRAINED, Q_FOR_RATIOS),
    ) {
        (Some(a), Some(b)) => a / b,
        _ => f64::NAN,
    };
    let st = d.status((cross - REFERENCE_CROSSOVER_RATIO).abs() / REFERENCE_CROSSOVER_RATIO <= 0.1);
    let _ = writeln!(
        d.text,
        "- crossover ratio M=48 vs M=95: {cross:.3} (stated: about {REFERENCE_CROSSOVER_RATIO}), {st}\n"
    );

    let _ = writeln!(d.text, "## Control plane\n\n| quantity | computed | reference | status |\n|---|---|---|---|");
    let st = d.status(audit.direct_lines == 339);
    let _ = writeln!(d.text, "| direct lines | {} | 339 | {st} |", audit.direct_lines);
    let st = d.status(audit.word_bits == 45);
    let _ = writeln!(d.text, "| control word bits | {} | 45 | {st} |", audit.word_bits);
    let ns = 1e-9;
    let one = min_qclk(45, 1, ns).unwrap_or(f64::NAN) / ns;
    let two = min_qclk(45, 2, ns).unwrap_or(f64::NAN) / ns;
    let st = d.status((one - 45.0).abs() < 1e-9);
    let _ = writeln!(d.text, "| min T_Qclk, 1 line, 1 ns clock | {one} ns | 45 ns | {st} |");
    let st = d.status((two - 23.0).abs() < 1e-9);
    let _ = writeln!(d.text, "| min T_Qclk, 2 lines, 1 ns clock | {two} ns | 23 ns | {st} |");
    let fast = serial_lines_required(45, 15.0 * ns, ns / 3.0).ok();
    let st = d.status(fast == Some(1));
    let _ = writeln!(
        d.text,
        "| lines at 15 ns, 1/3 ns clock | {} | 1 | {st} |",
        fast.map_or("-".into(), |v| v.to_string())
    );
    let _ = writeln!(
        d.text,
        "| pipeline at configured clocks | {} | - | - |",
        if audit.pipeline_feasible { "feasible" } else { "infeasible" }
    );
    let st = d.status(audit.within_fridge_limit);
    let _ = writeln!(
        d.text,
        "| multiplexed lines vs limit | {} | {} | {st} |",
        audit.multiplexed_lines, audit.line_budget.fridge_limit
    );
    for s in &audit.stages {
        let _ = writeln!(
            d.text,
            "| stage {} demand {:e} W | {} | - | - |",
            s.stage.label(),
            s.demand,
            if s.feasible { "feasible" } else { "infeasible" }
        );
    }

    let _ = writeln!(
        d.text,
        "\n## Routing capacity\n\n| node | channels | qubits | reference | status |\n|---|---|---|---|---|"
    );
    for (i, r) in routing.iter().enumerate() {
        let reference = REFERENCE_ROUTING.get(i).copied();
        let st = d.status(reference == Some(r.controllable_qubits));
        let _ = writeln!(
            d.text,
            "| {} | {} | {} | {} | {st} |",
            r.name,
            r.channels,
            r.controllable_qubits,
            reference.map_or("-".into(), |v| v.to_string())
        );
    }

    let _ = writeln!(
        d.text,
        "\n## Rotation error\n\n| J (µeV) | δV (µV) | ΔJ (eV) | ref | Z error (rad) | ref | gate time (ns) | ref | status |\n|---|---|---|---|---|---|---|---|---|"
    );
    for row in &rotation {
        let reference = REFERENCE_ROTATION
            .iter()
            .find(|r| (r.0 - row.j_target_uev).abs() < 1e-9 && (r.1 - row.gate_error_uv).abs() < 1e-9);
        let Some(&(_, _, dj, z, t)) = reference else {
            let _ = writeln!(
                d.text,
                "| {} | {} | {:.4e} | - | {:.4e} | - | {:.3} | - | - |",
                row.j_target_uev, row.gate_error_uv, row.j_error_ev, row.z_error_rad, row.gate_time_ns
            );
            continue;
        };
        let ok = rel(row.j_error_ev, dj).abs() <= 0.01
            && rel(row.z_error_rad, z).abs() <= 0.01
            && rel(row.gate_time_ns, t).abs() <= 0.005;
        let st = d.status(ok);
        let _ = writeln!(
            d.text,
            "| {} | {} | {:.4e} | {dj:.4e} | {:.4e} | {z:.4e} | {:.3} | {t} | {st} |",
            row.j_target_uev, row.gate_error_uv, row.j_error_ev, row.z_error_rad, row.gate_time_ns
        );
    }

    let path = write_output(&cfg.out, "report.md", d.text.as_bytes())?;
    Ok(ReportOutcome { path, markdown: d.text, discrepancies: d.flagged })
}
