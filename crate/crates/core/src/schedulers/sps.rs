//! Staggered pipelines and the simultaneous-batch baseline.

use crate::model::{Instance, JobId};

use super::SchedulerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpsSlot {
    pub job: JobId,
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpsPlan {
    pub parallelism: u64,
    pub slice_len: u64,
    pub slots: Vec<SpsSlot>,
}

impl SpsPlan {
    /// Round after the last slot ends.
    pub fn span(&self) -> u64 {
        self.slots.last().map_or(0, |s| s.end)
    }
}

/// Slot `j` runs `[offset + floor(j*tau/k), ... + tau)`.
pub fn sps_plan_at(job_ids: &[JobId], k: u64, tau: u64, offset: u64) -> SpsPlan {
    assert!(k >= 1 && tau >= 1, "pipeline needs k >= 1 and tau >= 1");
    let slots = job_ids
        .iter()
        .enumerate()
        .map(|(j, &job)| {
            let start = offset + (j as u64 * tau) / k;
            SpsSlot {
                job,
                start,
                end: start + tau,
            }
        })
        .collect();
    SpsPlan {
        parallelism: k,
        slice_len: tau,
        slots,
    }
}

pub fn sps_plan(job_ids: &[JobId], k: u64, tau: u64) -> SpsPlan {
    sps_plan_at(job_ids, k, tau, 0)
}

/// Start rounds for running every job in id order through one pipeline.
/// Slices shorter than the longest job would kill it, so they are refused.
pub fn sps_starts(inst: &Instance, k: u64, tau: u64) -> Result<Vec<u64>, SchedulerError> {
    if k == 0 || tau == 0 {
        return Err(SchedulerError::InvalidPipeline { k, tau });
    }
    let longest = inst.max_response_len();
    if tau < longest {
        return Err(SchedulerError::SliceTooShort { tau, longest });
    }
    let ids: Vec<JobId> = (0..inst.n()).collect();
    Ok(sps_plan(&ids, k, tau).slots.iter().map(|s| s.start).collect())
}

/// Batches of `floor(M / (s + o))` jobs started every `o` rounds.
pub fn sims_starts(inst: &Instance) -> Result<Vec<u64>, SchedulerError> {
    let o = inst.identical_len().ok_or(SchedulerError::NonIdenticalJobs)?;
    let batch = inst.memory_budget / (inst.prompt_len + o);
    Ok((0..inst.n() as u64).map(|j| (j / batch) * o).collect())
}
