//! The round loop.
//!
//! A policy sees the observable state at the start of round `t` and names
//! the batch to run. Jobs that were running in round `t - 1` and are left out
//! are killed; jobs listed in [`Batch::restarted`] are killed and started
//! again from zero within the same round.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Instance, JobId};
use crate::timeline::{ActiveJob, KillEvent, Timeline};

/// Everything a policy may observe at the start of a round. Response lengths
/// are deliberately absent; clairvoyant policies carry the instance
/// themselves.
#[derive(Debug, Clone, Copy)]
pub struct RoundView<'a> {
    pub round: u64,
    pub prompt_len: u64,
    pub memory_budget: u64,
    /// `u_{i,t}`. Zero for jobs not running in the previous round.
    pub progress: &'a [u64],
    pub finished: &'a [bool],
    /// Unfinished jobs that ran in the previous round, ascending id.
    pub previous: &'a [JobId],
}

impl RoundView<'_> {
    pub fn n(&self) -> usize {
        self.finished.len()
    }

    pub fn was_running(&self, id: JobId) -> bool {
        self.previous.binary_search(&id).is_ok()
    }

    /// Memory a job would use this round, given whether it restarts.
    pub fn cost(&self, id: JobId, restart: bool) -> u64 {
        let u = if restart || !self.was_running(id) {
            0
        } else {
            self.progress[id]
        };
        self.prompt_len + u + 1
    }

    pub fn unfinished(&self) -> impl Iterator<Item = JobId> + '_ {
        self.finished
            .iter()
            .enumerate()
            .filter(|(_, &f)| !f)
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Batch {
    pub active: Vec<JobId>,
    /// Subset of `active` that ran last round but starts over now.
    pub restarted: Vec<JobId>,
}

impl Batch {
    pub fn of(active: Vec<JobId>) -> Self {
        Self {
            active,
            restarted: Vec::new(),
        }
    }
}

pub trait Policy {
    fn name(&self) -> &str;
    fn decide(&mut self, view: &RoundView<'_>) -> Batch;
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("MemoryViolation({round}): batch {batch:?} needs {used} units, budget {budget}")]
    MemoryViolation {
        round: u64,
        batch: Vec<JobId>,
        used: u64,
        budget: u64,
    },
    #[error("ActivatedFinishedJob({round}, {job})")]
    ActivatedFinishedJob { round: u64, job: JobId },
    #[error("UnknownJob({round}, {job})")]
    UnknownJob { round: u64, job: JobId },
    #[error("DuplicateJob({round}, {job})")]
    DuplicateJob { round: u64, job: JobId },
    #[error("InvalidRestart({round}, {job}): job was not running in the previous round or is not in the batch")]
    InvalidRestart { round: u64, job: JobId },
    #[error("NonTermination: {unfinished} jobs unfinished after {horizon} rounds")]
    NonTermination { horizon: u64, unfinished: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    /// Round cap; `None` means [`default_horizon`].
    pub horizon: Option<u64>,
}

/// `10 * sum(o_i) + 10 * n * M`.
pub fn default_horizon(inst: &Instance) -> u64 {
    let n = inst.n() as u64;
    inst.total_work()
        .saturating_mul(10)
        .saturating_add(n.saturating_mul(inst.memory_budget).saturating_mul(10))
}

pub fn simulate(inst: &Instance, policy: &mut dyn Policy) -> Result<Timeline, SimError> {
    simulate_with(inst, policy, &SimOptions::default())
}

pub fn simulate_with(
    inst: &Instance,
    policy: &mut dyn Policy,
    opts: &SimOptions,
) -> Result<Timeline, SimError> {
    let n = inst.n();
    let horizon = opts.horizon.unwrap_or_else(|| default_horizon(inst));
    let mut tl = Timeline::with_jobs(n);
    let mut progress = vec![0u64; n];
    let mut finished = vec![false; n];
    let mut remaining = n;
    let mut previous: Vec<JobId> = Vec::new();
    let mut t = 0u64;

    while remaining > 0 {
        if t >= horizon {
            return Err(SimError::NonTermination {
                horizon,
                unfinished: remaining,
            });
        }
        let view = RoundView {
            round: t,
            prompt_len: inst.prompt_len,
            memory_budget: inst.memory_budget,
            progress: &progress,
            finished: &finished,
            previous: &previous,
        };
        let batch = policy.decide(&view);

        let mut active = BTreeSet::new();
        for &job in &batch.active {
            if job >= n {
                return Err(SimError::UnknownJob { round: t, job });
            }
            if finished[job] {
                return Err(SimError::ActivatedFinishedJob { round: t, job });
            }
            if !active.insert(job) {
                return Err(SimError::DuplicateJob { round: t, job });
            }
        }
        let mut restarted = BTreeSet::new();
        for &job in &batch.restarted {
            let ok = active.contains(&job) && previous.binary_search(&job).is_ok();
            if !ok || !restarted.insert(job) {
                return Err(SimError::InvalidRestart { round: t, job });
            }
        }

        let mut round_kills = Vec::new();
        for &job in &previous {
            if !active.contains(&job) || restarted.contains(&job) {
                progress[job] = 0;
                round_kills.push(job);
            }
        }
        let used: u64 = active
            .iter()
            .map(|&j| inst.prompt_len + progress[j] + 1)
            .sum();
        if used > inst.memory_budget {
            return Err(SimError::MemoryViolation {
                round: t,
                batch: active.into_iter().collect(),
                used,
                budget: inst.memory_budget,
            });
        }

        tl.kills
            .extend(round_kills.into_iter().map(|job| KillEvent { round: t, job }));
        let mut record = Vec::with_capacity(active.len());
        let mut next = Vec::with_capacity(active.len());
        for &job in &active {
            record.push(ActiveJob {
                id: job,
                progress: progress[job],
            });
            progress[job] += 1;
            if progress[job] >= inst.response_len(job) {
                finished[job] = true;
                remaining -= 1;
                tl.completions[job] = Some(t + 1);
            } else {
                next.push(job);
            }
        }
        tl.rounds.push(record);
        previous = next;
        t += 1;
    }
    Ok(tl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::{total_flow_time, verify_feasibility};

    /// Replays a fixed list of batches, then idles.
    struct Scripted(Vec<Batch>);

    impl Policy for Scripted {
        fn name(&self) -> &str {
            "scripted"
        }
        fn decide(&mut self, view: &RoundView<'_>) -> Batch {
            self.0.get(view.round as usize).cloned().unwrap_or_default()
        }
    }

    /// Runs every unfinished job each round.
    struct Greedy;

    impl Policy for Greedy {
        fn name(&self) -> &str {
            "greedy"
        }
        fn decide(&mut self, view: &RoundView<'_>) -> Batch {
            Batch::of(view.unfinished().collect())
        }
    }

    #[test]
    fn lone_job_completes_at_its_length() {
        let inst = Instance::new(0, 5, &[3]).unwrap();
        let tl = simulate(&inst, &mut Greedy).unwrap();
        assert_eq!(tl.completions, vec![Some(3)]);
        assert_eq!(total_flow_time(&tl).unwrap(), 3);
    }

    #[test]
    fn overlapping_pair_fails_at_round_one() {
        let inst = Instance::new(0, 3, &[2, 2]).unwrap();
        let err = simulate(&inst, &mut Greedy).unwrap_err();
        assert_eq!(
            err,
            SimError::MemoryViolation {
                round: 1,
                batch: vec![0, 1],
                used: 4,
                budget: 3
            }
        );
    }

    #[test]
    fn finished_job_cannot_be_activated() {
        let inst = Instance::new(0, 5, &[1, 2]).unwrap();
        let mut p = Scripted(vec![Batch::of(vec![0, 1]), Batch::of(vec![0, 1])]);
        assert_eq!(
            simulate(&inst, &mut p).unwrap_err(),
            SimError::ActivatedFinishedJob { round: 1, job: 0 }
        );
    }

    #[test]
    fn dropping_a_job_kills_it() {
        let inst = Instance::new(0, 5, &[2]).unwrap();
        let mut p = Scripted(vec![
            Batch::of(vec![0]),
            Batch::default(),
            Batch::of(vec![0]),
            Batch::of(vec![0]),
        ]);
        let tl = simulate(&inst, &mut p).unwrap();
        assert_eq!(tl.kills, vec![KillEvent { round: 1, job: 0 }]);
        assert_eq!(tl.completions, vec![Some(4)]);
        assert!(verify_feasibility(&tl, &inst).is_feasible());
    }

    #[test]
    fn restart_in_place_resets_progress() {
        let inst = Instance::new(0, 5, &[2]).unwrap();
        let mut p = Scripted(vec![
            Batch::of(vec![0]),
            Batch {
                active: vec![0],
                restarted: vec![0],
            },
            Batch::of(vec![0]),
        ]);
        let tl = simulate(&inst, &mut p).unwrap();
        assert_eq!(tl.progress(0, 1), 0);
        assert_eq!(tl.completions, vec![Some(3)]);
        assert_eq!(tl.kills.len(), 1);
        assert!(verify_feasibility(&tl, &inst).is_feasible());
    }

    #[test]
    fn restart_of_idle_job_is_rejected() {
        let inst = Instance::new(0, 5, &[2]).unwrap();
        let mut p = Scripted(vec![Batch {
            active: vec![0],
            restarted: vec![0],
        }]);
        assert_eq!(
            simulate(&inst, &mut p).unwrap_err(),
            SimError::InvalidRestart { round: 0, job: 0 }
        );
    }

    #[test]
    fn idle_policy_hits_the_horizon() {
        let inst = Instance::new(0, 5, &[2]).unwrap();
        let mut p = Scripted(Vec::new());
        let err = simulate_with(&inst, &mut p, &SimOptions { horizon: Some(7) }).unwrap_err();
        assert_eq!(
            err,
            SimError::NonTermination {
                horizon: 7,
                unfinished: 1
            }
        );
        assert_eq!(default_horizon(&inst), 10 * 2 + 10 * 5);
    }

    #[test]
    fn unknown_and_duplicate_ids() {
        let inst = Instance::new(0, 5, &[2]).unwrap();
        let mut p = Scripted(vec![Batch::of(vec![3])]);
        assert!(matches!(
            simulate(&inst, &mut p),
            Err(SimError::UnknownJob { round: 0, job: 3 })
        ));
        let mut p = Scripted(vec![Batch::of(vec![0, 0])]);
        assert!(matches!(
            simulate(&inst, &mut p),
            Err(SimError::DuplicateJob { round: 0, job: 0 })
        ));
    }
}
