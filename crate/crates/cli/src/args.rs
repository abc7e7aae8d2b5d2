use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qecarch::IdleWindowPolicy;

#[derive(Debug, Parser)]
#[command(name = "qecarch", version, about = "Electronics-constrained QEC scheduling and error budgets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a circuit file and print its gate census.
    Gen(GenArgs),
    /// Schedule a circuit with and without electronics constraints.
    Schedule(CommonArgs),
    /// Audit line counts, clock bandwidth and cryostat staging.
    Audit(CommonArgs),
    /// Write the serial-line, failure-bound, routing and rotation-error datasets.
    Sweep(SweepArgs),
    /// Write a Markdown report comparing computed and reference values.
    Report(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Generate the 21-qubit Bacon-Shor half-round.
    #[arg(long, conflicts_with = "input")]
    pub bs9: bool,
    /// Read and validate an existing circuit file instead.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    FirstLast,
    Makespan,
}

impl From<PolicyArg> for IdleWindowPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::FirstLast => IdleWindowPolicy::FirstToLastOp,
            PolicyArg::Makespan => IdleWindowPolicy::FullMakespan,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Circuit JSON; defaults to the generated 21-qubit half-round.
    #[arg(long, value_name = "FILE")]
    pub circuit: Option<PathBuf>,
    /// Architecture JSON; defaults to the bundled 21-qubit layout.
    #[arg(long, value_name = "FILE")]
    pub arch: Option<PathBuf>,
    /// Run only one constraint setting. Both run by default.
    #[arg(long, value_enum)]
    pub constraints: Option<OnOff>,
    #[arg(long, value_enum, default_value = "first-last")]
    pub policy: PolicyArg,
    /// Classical clock period, ns.
    #[arg(long)]
    pub tclk: Option<f64>,
    /// Quantum clock period, ns.
    #[arg(long)]
    pub tqclk: Option<f64>,
    /// Serial data lines.
    #[arg(long)]
    pub lines: Option<u32>,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget_nodes: u64,
    /// Exact-search threads; does not change any output.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Control-plane config JSON.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Exchange calibration CSV (j_target_ueV,delta_v_uV,delta_j_eV).
    #[arg(long, value_name = "FILE")]
    pub calibration: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Idle-tick totals to evaluate the failure bound at.
    #[arg(long, value_delimiter = ',', default_values_t = [48u64, 95])]
    pub m_values: Vec<u64>,
}
