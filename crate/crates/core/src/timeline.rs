//! Execution records, metrics, and an independent feasibility checker.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{Instance, JobId};

/// A job in the active batch of one round, with its progress `u_{i,t}` at
/// the start of that round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActiveJob {
    pub id: JobId,
    pub progress: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KillEvent {
    pub round: u64,
    pub job: JobId,
}

/// Full execution record of one simulation.
///
/// `rounds[t]` is the active batch `B_t`. Inactive unfinished jobs always
/// have progress zero (there is no pausing), so the active lists determine
/// the whole progress matrix.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Timeline {
    pub rounds: Vec<Vec<ActiveJob>>,
    /// Completion round `c_i`, the first round at whose start `u_i = o_i`.
    pub completions: Vec<Option<u64>>,
    pub kills: Vec<KillEvent>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimelineError {
    #[error("IncompleteTimeline: job {0} has no completion round")]
    IncompleteTimeline(JobId),
}

impl Timeline {
    pub fn with_jobs(n: usize) -> Self {
        Self {
            rounds: Vec::new(),
            completions: vec![None; n],
            kills: Vec::new(),
        }
    }

    pub fn n_jobs(&self) -> usize {
        self.completions.len()
    }

    pub fn makespan(&self) -> u64 {
        self.rounds.len() as u64
    }

    pub fn active_ids(&self, t: u64) -> Vec<JobId> {
        self.rounds
            .get(t as usize)
            .map(|r| r.iter().map(|a| a.id).collect())
            .unwrap_or_default()
    }

    pub fn is_complete(&self) -> bool {
        self.completions.iter().all(Option::is_some)
    }

    /// `u_{i,t}`: recorded progress if active, the final progress once the
    /// job has completed, zero otherwise.
    pub fn progress(&self, job: JobId, t: u64) -> u64 {
        if let Some(a) = self
            .rounds
            .get(t as usize)
            .and_then(|r| r.iter().find(|a| a.id == job))
        {
            return a.progress;
        }
        match self.completions.get(job).copied().flatten() {
            Some(c) if t >= c && c > 0 => self
                .rounds
                .get(c as usize - 1)
                .and_then(|r| r.iter().find(|a| a.id == job))
                .map_or(0, |a| a.progress + 1),
            _ => 0,
        }
    }

    /// Number of kill events per job.
    pub fn kill_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_jobs()];
        for k in &self.kills {
            if let Some(c) = counts.get_mut(k.job) {
                *c += 1;
            }
        }
        counts
    }

    /// Rounds at which each job's successful (final) run started.
    pub fn final_starts(&self) -> Vec<Option<u64>> {
        let mut starts = vec![None; self.n_jobs()];
        for (t, round) in self.rounds.iter().enumerate() {
            for a in round {
                if a.progress == 0 {
                    starts[a.id] = Some(t as u64);
                }
            }
        }
        starts
    }
}

pub fn total_flow_time(tl: &Timeline) -> Result<u64, TimelineError> {
    tl.completions
        .iter()
        .enumerate()
        .try_fold(0u64, |acc, (id, c)| {
            c.map(|c| acc + c)
                .ok_or(TimelineError::IncompleteTimeline(id))
        })
}

/// Per-round memory `sum_{i in B_t} (s + u_{i,t} + 1)`; one entry per round.
pub fn memory_profile(tl: &Timeline, inst: &Instance) -> Vec<u64> {
    tl.rounds
        .iter()
        .map(|round| {
            round
                .iter()
                .map(|a| inst.prompt_len + a.progress + 1)
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub total_flow_time: u64,
    pub mean_flow_time: f64,
    pub kill_count: usize,
    pub peak_memory: u64,
    pub makespan: u64,
    pub per_round_memory: Vec<u64>,
}

impl RunMetrics {
    pub fn from_timeline(tl: &Timeline, inst: &Instance) -> Result<Self, TimelineError> {
        let total = total_flow_time(tl)?;
        let per_round_memory = memory_profile(tl, inst);
        Ok(Self {
            total_flow_time: total,
            mean_flow_time: total as f64 / tl.n_jobs().max(1) as f64,
            kill_count: tl.kills.len(),
            peak_memory: per_round_memory.iter().copied().max().unwrap_or(0),
            makespan: tl.makespan(),
            per_round_memory,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MemoryExceeded {
        round: u64,
        used: u64,
        budget: u64,
        batch: Vec<JobId>,
    },
    UnknownJob {
        round: u64,
        job: JobId,
    },
    DuplicateInBatch {
        round: u64,
        job: JobId,
    },
    /// Recorded progress disagrees with the start/continue/kill rules.
    ProgressUpdateBroken {
        round: u64,
        job: JobId,
        expected: u64,
        recorded: u64,
    },
    ProgressPastCompletion {
        round: u64,
        job: JobId,
    },
    ActiveAfterCompletion {
        round: u64,
        job: JobId,
    },
    /// A job left the batch unfinished without a kill event (a pause).
    UnrecordedKill {
        round: u64,
        job: JobId,
    },
    /// A kill event that does not match a job leaving (or restarting in) the batch.
    SpuriousKill {
        round: u64,
        job: JobId,
    },
    MissingCompletion {
        job: JobId,
    },
    CompletionMismatch {
        job: JobId,
        recorded: Option<u64>,
        derived: Option<u64>,
    },
    JobCountMismatch {
        timeline: usize,
        instance: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-derives progress from the active lists and kill events alone and checks
/// every timeline invariant against the instance. Violations are collected,
/// never short-circuited.
pub fn verify_feasibility(tl: &Timeline, inst: &Instance) -> FeasibilityReport {
    let n = inst.n();
    let mut violations = Vec::new();
    if tl.n_jobs() != n {
        violations.push(Violation::JobCountMismatch {
            timeline: tl.n_jobs(),
            instance: n,
        });
    }
    let mut kills: BTreeMap<u64, BTreeSet<JobId>> = BTreeMap::new();
    for k in &tl.kills {
        kills.entry(k.round).or_default().insert(k.job);
    }

    let mut progress = vec![0u64; n];
    let mut derived: Vec<Option<u64>> = vec![None; n];
    let mut prev: BTreeSet<JobId> = BTreeSet::new();
    let no_kills = BTreeSet::new();

    for (t, round) in tl.rounds.iter().enumerate() {
        let t = t as u64;
        let killed_now = kills.get(&t).unwrap_or(&no_kills);
        let mut current = BTreeSet::new();
        let mut used = 0u64;
        for a in round {
            if a.id >= n {
                violations.push(Violation::UnknownJob { round: t, job: a.id });
                continue;
            }
            if !current.insert(a.id) {
                violations.push(Violation::DuplicateInBatch { round: t, job: a.id });
                continue;
            }
            if derived[a.id].is_some() {
                violations.push(Violation::ActiveAfterCompletion { round: t, job: a.id });
                continue;
            }
            let expected = if prev.contains(&a.id) && !killed_now.contains(&a.id) {
                progress[a.id]
            } else {
                0
            };
            if a.progress != expected {
                violations.push(Violation::ProgressUpdateBroken {
                    round: t,
                    job: a.id,
                    expected,
                    recorded: a.progress,
                });
            }
            if expected >= inst.response_len(a.id) {
                violations.push(Violation::ProgressPastCompletion { round: t, job: a.id });
            }
            used += inst.prompt_len + expected + 1;
        }
        if used > inst.memory_budget {
            violations.push(Violation::MemoryExceeded {
                round: t,
                used,
                budget: inst.memory_budget,
                batch: round.iter().map(|a| a.id).collect(),
            });
        }
        for &job in &prev {
            if !current.contains(&job) && !killed_now.contains(&job) {
                violations.push(Violation::UnrecordedKill { round: t, job });
            }
        }
        for &job in killed_now {
            if !prev.contains(&job) {
                violations.push(Violation::SpuriousKill { round: t, job });
            }
        }
        // Apply the round: kills reset, actives advance.
        for &job in killed_now {
            if job < n {
                progress[job] = 0;
            }
        }
        let mut next = BTreeSet::new();
        for &job in &current {
            if derived[job].is_some() {
                continue;
            }
            let u = if prev.contains(&job) && !killed_now.contains(&job) {
                progress[job]
            } else {
                0
            };
            progress[job] = u + 1;
            if progress[job] >= inst.response_len(job) {
                derived[job] = Some(t + 1);
            } else {
                next.insert(job);
            }
        }
        prev = next;
    }
    for k in kills.range(tl.makespan()..) {
        for &job in k.1 {
            violations.push(Violation::SpuriousKill { round: *k.0, job });
        }
    }

    for (job, &d) in derived.iter().enumerate().take(n) {
        let recorded = tl.completions.get(job).copied().flatten();
        match (recorded, d) {
            (_, None) => violations.push(Violation::MissingCompletion { job }),
            (r, d) if r != d => violations.push(Violation::CompletionMismatch {
                job,
                recorded: r,
                derived: d,
            }),
            _ => {}
        }
    }
    FeasibilityReport { violations }
}
