//! Closed-form quantities, bounds, and the brute-force optimum.

pub mod bounds;
pub mod formulas;
pub mod oracle;
pub mod spacing;

use thiserror::Error;

pub use bounds::{
    diagnostics_for, opt_lb_multiclass, phase_diagnostics, theorem_bound, BoundKind, BoundReport,
    Diagnostics, PhaseStats,
};
pub use formulas::{
    area, ceiling_inequality_holds, max_parallelism, opt_lb_single, packing_inequality_holds,
    parallelism_floor_bound, peak_memory,
};
pub use oracle::{brute_force_opt, OracleSolution};
pub use spacing::spacing_check;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("Infeasible: a slice of {tau} with prompt {s} does not fit budget {budget}")]
    Infeasible { tau: u64, s: u64, budget: u64 },
    #[error("GuardRail: {n} jobs / horizon {horizon} exceed the oracle limits ({max_jobs} jobs, horizon {max_horizon})")]
    GuardRail {
        n: usize,
        horizon: u64,
        max_jobs: usize,
        max_horizon: u64,
    },
    #[error("NoScheduleWithinHorizon: nothing feasible starts by round {0}")]
    NoScheduleWithinHorizon(u64),
    #[error("NonIdenticalJobs: the check needs a single response length")]
    NonIdenticalJobs,
    #[error("PreemptiveTimeline: the timeline contains kills")]
    PreemptiveTimeline,
    #[error("IncompleteTimeline: some job never completed")]
    IncompleteTimeline,
}
