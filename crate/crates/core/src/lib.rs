//! Electronics-constrained scheduling and error-budget toolkit for a
//! 21-qubit Bacon-Shor quantum memory.
//!
//! The crate is organized bottom-up:
//!
//! - [`circuit`]: typed gate DAGs and the BS9(21) half-round generator.
//! - [`layout`]: qubit-to-control-block partition, CPHASE switch inventory,
//!   routing-density model.
//! - [`constraints`]: feasibility predicates a tick assignment must satisfy.
//! - [`scheduler`]: greedy list scheduler, branch-and-bound, exhaustive oracle,
//!   idle accounting and grid export.
//! - [`control`]: line budgets, control-word serialization, clock relation,
//!   cryostat staging.
//! - [`gate_accuracy`]: exchange-gate rotation errors from voltage noise and
//!   timing jitter.
//! - [`error_budget`]: pessimistic circuit failure bound and crossover metrics.
//!
//! With the default `parallel` feature, batch work (exact-search subtrees,
//! sweeps, randomized corpora) runs on rayon. Without it the same work runs
//! sequentially and produces identical results.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod constraints;
pub mod control;
pub mod error;
pub mod error_budget;
pub mod gate_accuracy;
pub mod layout;
pub mod par;
pub mod random_instances;
pub mod scheduler;

pub use circuit::{census, generate_bs9_21_half_round, validate_circuit, Circuit, Gate, GateCensus, GateKind};
pub use constraints::{is_feasible, ConstraintFlags, ConstraintSet, TickAssignment, Violation};
pub use error::{Error, Result};
pub use layout::{crosstalk_bs9_21_arch, default_bs9_21_arch, ArchModel, ControlBlock, RoutingNode};
pub use scheduler::{
    account_idles, oracle_schedule, schedule_exact, schedule_greedy, ExactOptions, IdleWindowPolicy, Schedule,
};
