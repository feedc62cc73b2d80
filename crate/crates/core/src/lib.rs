//! Round-based simulation of LLM decode scheduling under a KV-cache budget.
//!
//! Every job shares a prompt of `s` memory units and needs `o_i` decode
//! rounds. While active, a job with `u` rounds of progress occupies
//! `s + u + 1` units; the sum over the active batch may never exceed the
//! budget `M`. A job that leaves the batch before finishing is killed and
//! loses all progress.
//!
//! The crate is split into:
//!
//! - [`model`]: instances and their validation.
//! - [`engine`]: the [`Policy`] trait and the round loop that enforces the
//!   memory constraint.
//! - [`timeline`]: execution records, metrics and an independent feasibility
//!   checker.
//! - [`schedulers`]: staggered pipelines, geometric batching/slicing, and the
//!   baselines they are compared against.
//! - [`analysis`]: closed-form peak memory, parallelism, area lower bounds,
//!   per-phase diagnostics and a brute-force optimum for tiny instances.
//! - [`workloads`]: instance generators and trace ingestion.
//! - [`verify`]: property suites shared by the CLI and the test targets.

pub mod analysis;
pub mod engine;
pub mod export;
pub mod model;
pub mod rational;
pub mod schedulers;
pub mod timeline;
pub mod verify;
pub mod workloads;

pub use engine::{simulate, Batch, Policy, RoundView, SimError, SimOptions};
pub use model::{validate_instance, Instance, Job, JobId, ModelError};
pub use rational::Rational;
pub use schedulers::{PolicyKind, PolicyParams, SchedulerError};
pub use timeline::{
    memory_profile, total_flow_time, verify_feasibility, FeasibilityReport, RunMetrics, Timeline,
    Violation,
};
