//! Geometric slicing: phases of staggered pipelines over every unfinished
//! job, with slices growing geometrically. Jobs that outlive their slice are
//! killed and retried in the next phase. Nothing here reads response lengths.

use crate::engine::{Batch, Policy, RoundView};
use crate::model::{InstanceShape, JobId};

use super::geometric::GeometricConfig;
use super::sps::{sps_plan_at, SpsSlot};
use super::SchedulerError;

/// Phase bookkeeping shared by the plain and speculative variants.
#[derive(Debug, Clone)]
struct PhaseRunner {
    taus: Vec<u64>,
    ks: Vec<u64>,
    phase: usize,
    slots: Vec<SpsSlot>,
    open: bool,
    /// Start round of each phase opened so far.
    phase_starts: Vec<u64>,
}

impl PhaseRunner {
    fn new(cfg: &GeometricConfig, shape: InstanceShape) -> Result<Self, SchedulerError> {
        Ok(Self {
            taus: cfg.slice_int.clone(),
            ks: cfg.parallelism(shape.prompt_len, shape.memory_budget)?,
            phase: 0,
            slots: Vec::new(),
            open: false,
            phase_starts: Vec::new(),
        })
    }

    fn phase_done(&self, view: &RoundView<'_>) -> bool {
        self.slots
            .iter()
            .all(|s| view.finished[s.job] || view.round >= s.end)
    }

    /// Pipeline jobs for this round and the subset that (re)starts now while
    /// still holding memory from the previous round.
    fn step(&mut self, view: &RoundView<'_>) -> (Vec<JobId>, Vec<JobId>) {
        loop {
            if self.open && self.phase_done(view) {
                self.open = false;
                self.phase += 1;
            }
            if self.open {
                break;
            }
            let remaining: Vec<JobId> = view.unfinished().collect();
            if remaining.is_empty() {
                return (Vec::new(), Vec::new());
            }
            // Past the last phase the slice already covers every job.
            let p = self.phase.min(self.taus.len() - 1);
            self.slots = sps_plan_at(&remaining, self.ks[p], self.taus[p], view.round).slots;
            self.phase_starts.push(view.round);
            self.open = true;
        }
        let mut active = Vec::new();
        let mut restarted = Vec::new();
        for s in &self.slots {
            if s.start > view.round {
                break;
            }
            if view.round < s.end && !view.finished[s.job] {
                active.push(s.job);
                if s.start == view.round && view.was_running(s.job) {
                    restarted.push(s.job);
                }
            }
        }
        (active, restarted)
    }
}

#[derive(Debug, Clone)]
pub struct Gsa {
    runner: PhaseRunner,
}

impl Gsa {
    pub fn new(cfg: &GeometricConfig, shape: InstanceShape) -> Result<Self, SchedulerError> {
        Ok(Self {
            runner: PhaseRunner::new(cfg, shape)?,
        })
    }

    pub fn phase_starts(&self) -> &[u64] {
        &self.runner.phase_starts
    }
}

impl Policy for Gsa {
    fn name(&self) -> &str {
        "gsa"
    }

    fn decide(&mut self, view: &RoundView<'_>) -> Batch {
        let (active, restarted) = self.runner.step(view);
        Batch { active, restarted }
    }
}

/// Slicing plus speculation: memory the pipeline leaves free this round runs
/// other unfinished jobs in id order. Speculative runs are killed newest
/// first whenever the pipeline needs the room, and a job that completes
/// speculatively drops out of later phases.
#[derive(Debug, Clone)]
pub struct GsaSpec {
    runner: PhaseRunner,
    /// `(start round, job)` of running speculative jobs.
    speculative: Vec<(u64, JobId)>,
}

impl GsaSpec {
    pub fn new(cfg: &GeometricConfig, shape: InstanceShape) -> Result<Self, SchedulerError> {
        Ok(Self {
            runner: PhaseRunner::new(cfg, shape)?,
            speculative: Vec::new(),
        })
    }
}

impl Policy for GsaSpec {
    fn name(&self) -> &str {
        "gsa-spec"
    }

    fn decide(&mut self, view: &RoundView<'_>) -> Batch {
        let (mut active, restarted) = self.runner.step(view);
        let mut in_batch = vec![false; view.n()];
        for &j in &active {
            in_batch[j] = true;
        }
        let mut used: u64 = active
            .iter()
            .map(|&j| view.cost(j, restarted.contains(&j)))
            .sum();

        // Speculative runs still alive and not claimed by a pipeline slot.
        self.speculative
            .retain(|&(_, j)| !view.finished[j] && !in_batch[j] && view.was_running(j));
        let mut spec_used: u64 = self.speculative.iter().map(|&(_, j)| view.cost(j, false)).sum();
        // Newest first: sort by start descending, larger id first on ties.
        self.speculative.sort_by(|a, b| b.cmp(a));
        while used + spec_used > view.memory_budget {
            let (_, j) = self.speculative.remove(0);
            spec_used -= view.cost(j, false);
        }
        for &(_, j) in &self.speculative {
            in_batch[j] = true;
            active.push(j);
        }
        used += spec_used;

        let fresh = view.prompt_len + 1;
        for j in view.unfinished() {
            if used + fresh > view.memory_budget {
                break;
            }
            // Jobs dropped this round wait a round before speculating again.
            if in_batch[j] || view.was_running(j) {
                continue;
            }
            in_batch[j] = true;
            active.push(j);
            self.speculative.push((view.round, j));
            used += fresh;
        }
        Batch { active, restarted }
    }
}
