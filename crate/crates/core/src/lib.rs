//! Online bipartite matching with budget refills.
//!
//! The crate is organised around four layers:
//!
//! * [`budget`], [`instance`], [`engine`]: the data model and the online engine that
//!   enforces the feasibility rules (edges only, one match per arrival, positive budget).
//! * [`generators`] and [`policies`]: random and adaptive-adversary instances, and the
//!   Greedy / Balance decision rules.
//! * [`offline_opt`]: the exact offline optimum via a time-expanded max-flow network,
//!   plus a brute-force oracle.
//! * [`analysis`] and [`harness`]: fluid-limit ODEs, stationary points, bound formulas,
//!   and seeded experiment orchestration.

pub mod analysis;
pub mod budget;
pub mod engine;
pub mod error;
pub mod generators;
pub mod harness;
pub mod instance;
pub mod offline_opt;
pub mod policies;
pub mod rng;
pub mod trace;

pub use budget::{budget_histogram, step_budget, BudgetState, Cap};
pub use engine::{run_adaptive, run_online, RunOptions};
pub use error::{Error, Result};
pub use instance::{AdaptiveInstance, ArrivalRun, InstanceHeader, OnlineInstance, RefillSchedule};
pub use policies::{Policy, PolicyKind};
pub use trace::MatchTrace;
