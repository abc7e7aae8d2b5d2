//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::Parser;
use serde_json::Value;

use qecarch::control::{pipeline_feasible, serial_lines_required, ClockConfig};
use qecarch::error_budget::{circuit_error_bound, crossover_gate_error, ErrorBudgetInput};
use qecarch::par;
use qecarch::random_instances::{random_instance, Instance, InstanceShape};
use qecarch::{
    crosstalk_bs9_21_arch, is_feasible, oracle_schedule, schedule_exact, ConstraintFlags, ConstraintSet, ExactOptions,
    IdleWindowPolicy,
};
use qecarch_cli::args::{CommonArgs, SweepArgs};
use qecarch_cli::{cmd_audit, cmd_gen, cmd_schedule, cmd_sweep, run, Cli, Command, RunConfig};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

const NS: f64 = 1e-9;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn parse(args: &[&str]) -> Cli {
    let mut full = vec!["qecarch"];
    full.extend_from_slice(args);
    Cli::try_parse_from(full).expect("arguments parse")
}

fn common(args: &[&str]) -> CommonArgs {
    match parse(args).command {
        Command::Schedule(a) | Command::Audit(a) | Command::Report(a) => a,
        Command::Sweep(SweepArgs { common, .. }) => common,
        Command::Gen(_) => panic!("gen has no common arguments"),
    }
}

fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).expect("csv opens");
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("column {key} is numeric"))
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(t)
    } else {
        Err(format!("took {t:.2?}, limit {limit:?}"))
    }
}

fn census(dir: &Path) -> Check {
    let start = Instant::now();
    let out = dir.join("gen");
    let Command::Gen(a) = parse(&["gen", "--bs9", "--out", out.to_str().unwrap()]).command else { unreachable!() };
    let g = cmd_gen(&a).map_err(|e| e.to_string())?;
    let file: Value = serde_json::from_str(&std::fs::read_to_string(out.join("census.json")).unwrap()).unwrap();
    let want = [("Prep", 12), ("XHalfPi", 42), ("ZHalfPi", 18), ("CPhase", 24), ("Msr", 12)];
    for (k, n) in want {
        if file[k] != n {
            return Err(format!("{k}: got {}, want {n}", file[k]));
        }
    }
    if g.census.total() != 108 {
        return Err(format!("total {}", g.census.total()));
    }
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("{} = 108 gates in {t:.2?}", g.census.summary_line()))
}

fn bound_values() -> Check {
    let mut parts = Vec::new();
    for (m, expect) in [(95u64, 4.465e-5), (48, 1.128e-5)] {
        let got =
            circuit_error_bound(&ErrorBudgetInput { n_gates: 108, idle_ticks: m, gate_error: 0.0, idle_error: 1e-4 });
        let oracle = (m * (m - 1)) as f64 / 2.0 * 1e-4 * 1e-4;
        if rel(got.p_circuit, expect) > 1e-12 || rel(got.p_circuit, oracle) > 1e-12 {
            return Err(format!("M={m}: {:e} vs {expect:e}", got.p_circuit));
        }
        parts.push(format!("M={m}: {:.4e}", got.p_circuit));
    }
    Ok(parts.join(", "))
}

/// Reference rows: J (µeV), δV (µV), ΔJ (eV), Z error (rad), gate time (ns).
const ROTATION_ROWS: [(f64, f64, f64, f64, f64); 16] = [
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

fn sweep(dir: &Path) -> Result<PathBuf, String> {
    let out = dir.join("sweep");
    let cfg = RunConfig::load(&common(&["sweep", "--out", out.to_str().unwrap()])).map_err(|e| e.to_string())?;
    cmd_sweep(&cfg, &[48, 95]).map_err(|e| e.to_string())?;
    Ok(out)
}

fn rotation_table(dir: &Path) -> Check {
    let start = Instant::now();
    let rows = read_csv(&sweep(dir)?.join("rotation_errors.csv"));
    if rows.len() != 16 {
        return Err(format!("{} rows", rows.len()));
    }
    let (mut worst_err, mut worst_time) = (0.0f64, 0.0f64);
    for (row, &(j, dv, dj, z, t)) in rows.iter().zip(&ROTATION_ROWS) {
        if num(row, "j_target_ueV") != j || num(row, "gate_error_uV") != dv {
            return Err(format!("row order: {row:?}"));
        }
        worst_err = worst_err.max(rel(num(row, "j_error_eV"), dj)).max(rel(num(row, "z_error_rad"), z));
        worst_time = worst_time.max(rel(num(row, "gate_time_ns"), t));
    }
    let t = within(start, Duration::from_secs(1))?;
    let msg = format!(
        "16 rows, worst ΔJ/Z deviation {:.3}%, worst gate time {:.3}% in {t:.2?}",
        100.0 * worst_err,
        100.0 * worst_time
    );
    if worst_err <= 0.01 && worst_time <= 0.005 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn clock_anchors() -> Check {
    let got = [
        serial_lines_required(45, 45.0 * NS, NS).map_err(|e| e.to_string())?,
        serial_lines_required(45, 23.0 * NS, NS).map_err(|e| e.to_string())?,
        serial_lines_required(45, 15.0 * NS, NS / 3.0).map_err(|e| e.to_string())?,
    ];
    let cfg = ClockConfig { t_clk: NS, t_qclk: 30.0 * NS, data_lines: 2, word_bits: 45 };
    let pipe = pipeline_feasible(&cfg).map_err(|e| e.to_string())?;
    let msg = format!("lines {got:?}, pipeline(1 ns, 30 ns, 2, 45) = {pipe}");
    if got == [1, 2, 1] && pipe {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn routing(dir: &Path) -> Check {
    let rows = read_csv(&sweep(dir)?.join("routing_capacity.csv"));
    let channels: Vec<u32> = rows.iter().map(|r| num(r, "channels") as u32).collect();
    let qubits: Vec<u32> = rows.iter().map(|r| num(r, "controllable_qubits") as u32).collect();
    let msg = format!("channels {channels:?} -> qubits {qubits:?}");
    if channels == [4, 19, 27, 40, 62] && qubits == [0, 1, 2, 3, 5] {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn line_power(dir: &Path) -> Check {
    let out = dir.join("audit");
    let cfg = RunConfig::load(&common(&["audit", "--out", out.to_str().unwrap()])).map_err(|e| e.to_string())?;
    cmd_audit(&cfg).map_err(|e| e.to_string())?;
    let a: Value = serde_json::from_str(&std::fs::read_to_string(out.join("audit.json")).unwrap()).unwrap();
    let mk = a["stages"].as_array().unwrap().iter().find(|s| s["stage"] == "100mK").cloned().unwrap_or(Value::Null);
    let msg = format!(
        "direct lines {}, 100mK demand {} W vs budget {} W feasible={}",
        a["direct_lines"], mk["demand"], mk["cooling_budget"], mk["feasible"]
    );
    if a["direct_lines"] == 339 && mk["feasible"] == false && mk["demand"] == 1.2e-3 && mk["cooling_budget"] == 4e-4 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

const CORPUS: u64 = 240;

struct CorpusRun {
    seed: u64,
    exact: u64,
    oracle: u64,
    oracle_off: u64,
    exact_off: u64,
    feasible: bool,
}

fn corpus_runs() -> Vec<CorpusRun> {
    let corpus: Vec<Instance> = (0..CORPUS).map(|s| random_instance(s, InstanceShape::default())).collect();
    par::map(&corpus, |inst| {
        let policy = IdleWindowPolicy::FirstToLastOp;
        let horizon = inst.horizon();
        let cs = ConstraintSet::new(inst.flags, &inst.arch);
        let off = ConstraintSet::new(ConstraintFlags::none(), &inst.arch);
        let exact = schedule_exact(&inst.circuit, &cs, policy, &ExactOptions::default()).unwrap();
        let oracle = oracle_schedule(&inst.circuit, &cs, policy, horizon).unwrap();
        let exact_off = schedule_exact(&inst.circuit, &off, policy, &ExactOptions::default()).unwrap();
        let oracle_off = oracle_schedule(&inst.circuit, &off, policy, horizon).unwrap();
        let feasible =
            [&exact, &oracle].iter().all(|s| is_feasible(&inst.circuit, &s.assignment, &cs).unwrap().feasible)
                && [&exact_off, &oracle_off]
                    .iter()
                    .all(|s| is_feasible(&inst.circuit, &s.assignment, &off).unwrap().feasible);
        CorpusRun {
            seed: inst.seed,
            exact: exact.idle_ticks_total,
            oracle: oracle.idle_ticks_total,
            oracle_off: oracle_off.idle_ticks_total,
            exact_off: exact_off.idle_ticks_total,
            feasible,
        }
    })
}

fn optimality(runs: &[CorpusRun], start: Instant) -> Check {
    let bad: Vec<u64> =
        runs.iter().filter(|r| r.exact != r.oracle || r.exact_off != r.oracle_off).map(|r| r.seed).collect();
    let infeasible: Vec<u64> = runs.iter().filter(|r| !r.feasible).map(|r| r.seed).collect();
    let t = within(start, Duration::from_secs(300))?;
    let msg = format!("{} instances, {} mismatches, {} infeasible, {t:.2?}", runs.len(), bad.len(), infeasible.len());
    if bad.is_empty() && infeasible.is_empty() && runs.len() >= 200 {
        Ok(msg)
    } else {
        Err(format!("{msg}; seeds {bad:?} {infeasible:?}"))
    }
}

fn monotonicity(runs: &[CorpusRun]) -> Check {
    let bad: Vec<u64> = runs.iter().filter(|r| r.oracle < r.oracle_off).map(|r| r.seed).collect();
    let strict = runs.iter().filter(|r| r.oracle > r.oracle_off).count();
    let msg =
        format!("{} instances, {} exceptions, {strict} strictly costlier with constraints", runs.len(), bad.len());
    if bad.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; seeds {bad:?}"))
    }
}

fn end_to_end(dir: &Path) -> Check {
    let start = Instant::now();
    let arch_path = dir.join("crosstalk_arch.json");
    std::fs::write(&arch_path, crosstalk_bs9_21_arch().to_json().unwrap()).unwrap();
    let out = dir.join("schedule_crosstalk");
    let cfg = RunConfig::load(&common(&[
        "schedule",
        "--arch",
        arch_path.to_str().unwrap(),
        "--budget-nodes",
        "10000000",
        "--out",
        out.to_str().unwrap(),
    ]))
    .map_err(|e| e.to_string())?;
    let s = cmd_schedule(&cfg).map_err(|e| e.to_string())?;
    let ratio = s.ratio.ok_or("no ratio")?;

    let plain_out = dir.join("schedule_default");
    let plain = cmd_schedule(
        &RunConfig::load(&common(&["schedule", "--budget-nodes", "10000000", "--out", plain_out.to_str().unwrap()]))
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let t = within(start, Duration::from_secs(600))?;

    let (off, on) = (s.run(false).unwrap(), s.run(true).unwrap());
    let agree: Vec<String> = s
        .agreement
        .iter()
        .map(|a| {
            format!(
                "{}/{} {:+.0}%{}",
                a.constraints,
                a.policy,
                100.0 * a.relative_deviation,
                if a.within_25_percent { "" } else { "!" }
            )
        })
        .collect();
    let msg = format!(
        "crosstalk layout M {} -> {} ratio {ratio:.3} (certified {}/{}); empty-overlap layout M {} -> {} ratio {:.3}; reference 48/95 [{}]; {t:.1?}",
        off.exact_m,
        on.exact_m,
        off.optimal,
        on.optimal,
        plain.run(false).unwrap().exact_m,
        plain.run(true).unwrap().exact_m,
        plain.ratio.unwrap_or(f64::NAN),
        agree.join(", ")
    );
    if (1.5..=2.5).contains(&ratio) && s.budget_nodes == 10_000_000 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn failure_curves(dir: &Path) -> Check {
    let out = sweep(dir)?;
    let rows = read_csv(&out.join("failure_bound.csv"));
    let mut curves: BTreeMap<(u64, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        curves.entry((num(r, "q").to_bits(), num(r, "M") as u64)).or_default().push((num(r, "p"), num(r, "p_circuit")));
    }
    if curves.len() != 6 {
        return Err(format!("{} curves", curves.len()));
    }
    for (k, c) in &curves {
        if !c.windows(2).all(|w| w[1].1 > w[0].1) {
            return Err(format!("curve {k:?} not strictly increasing"));
        }
    }
    for q in [1e-4f64, 1e-5, 1e-6] {
        let (Some(lo), Some(hi)) = (curves.get(&(q.to_bits(), 48)), curves.get(&(q.to_bits(), 95))) else {
            return Err(format!("missing curves for q={q}"));
        };
        if !lo.iter().zip(hi).all(|(a, b)| b.1 >= a.1) {
            return Err(format!("q={q}: constrained below unconstrained"));
        }
    }
    let cross: Value = serde_json::from_str(&std::fs::read_to_string(out.join("crossovers.json")).unwrap()).unwrap();
    let mut worst = 0.0f64;
    for c in cross.as_array().unwrap() {
        let (q, m) = (c["q"].as_f64().unwrap(), c["M"].as_u64().unwrap());
        let Some(p) = c["p_star"].as_f64() else { continue };
        let b = circuit_error_bound(&ErrorBudgetInput { n_gates: 108, idle_ticks: m, gate_error: p, idle_error: q });
        worst = worst.max(rel(b.p_circuit, q));
    }
    let ceiling: f64 = (95.0 * 94.0) / (48.0 * 47.0);
    let cross_ratio = crossover_gate_error(108, 48, 1e-4).unwrap() / crossover_gate_error(108, 95, 1e-4).unwrap();
    let msg = format!(
        "6 curves increasing, constrained dominates, crossover residual {worst:.1e}; ceiling ratio {ceiling:.3} vs stated ~3 (discrepancy), crossover ratio {cross_ratio:.2} vs stated ~5 (discrepancy)"
    );
    if worst < 1e-12 && (ceiling - 3.958).abs() < 1e-3 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        out.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap());
    }
    out
}

fn determinism(dir: &Path) -> Check {
    let workers = [None, Some("1"), Some("3")];
    let mut snapshots = Vec::new();
    for (i, w) in workers.iter().enumerate() {
        let out = dir.join(format!("det{i}"));
        let o = out.to_str().unwrap();
        let mut cmds: Vec<Vec<&str>> = vec![
            vec!["gen", "--bs9", "--out", o],
            vec!["schedule", "--budget-nodes", "300000", "--out", o],
            vec!["audit", "--out", o],
            vec!["sweep", "--out", o],
            vec!["report", "--budget-nodes", "300000", "--out", o],
        ];
        if let Some(w) = w {
            cmds[1].extend(["--workers", w]);
            cmds[4].extend(["--workers", w]);
        }
        for c in cmds {
            run(parse(&c)).map_err(|e| format!("{c:?}: {e}"))?;
        }
        snapshots.push(dir_bytes(&out));
    }
    let files = snapshots[0].len();
    for (i, s) in snapshots.iter().enumerate().skip(1) {
        if s != &snapshots[0] {
            let diff: Vec<&String> = s.keys().filter(|k| snapshots[0].get(*k) != s.get(*k)).collect();
            return Err(format!("run {i} differs in {diff:?}"));
        }
    }
    Ok(format!("{files} files bit-identical across {} runs (workers default/1/3)", snapshots.len()))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let dir = tmp.path();
    let corpus_start = Instant::now();
    let corpus = corpus_runs();
    let checks: Vec<Criterion> = vec![
        ("gate census", Box::new(|| census(dir))),
        ("failure bound values", Box::new(bound_values)),
        ("rotation error table", Box::new(|| rotation_table(dir))),
        ("clock and bandwidth anchors", Box::new(clock_anchors)),
        ("routing capacity table", Box::new(|| routing(dir))),
        ("line and power audit", Box::new(|| line_power(dir))),
        ("exact search matches oracle", Box::new(|| optimality(&corpus, corpus_start))),
        ("constraint monotonicity", Box::new(|| monotonicity(&corpus))),
        ("21-qubit end-to-end idle ratio", Box::new(|| end_to_end(dir))),
        ("failure-bound curves", Box::new(|| failure_curves(dir))),
        ("deterministic outputs", Box::new(|| determinism(dir))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(msg) => println!("[PASS] {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
