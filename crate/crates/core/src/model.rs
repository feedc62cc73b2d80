//! Problem instances.

use thiserror::Error;

pub type JobId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Job {
    pub id: JobId,
    /// Number of decode rounds the job needs (`o_i`).
    pub response_len: u64,
}

/// A batch of jobs sharing one prompt length under a fixed memory budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub prompt_len: u64,
    pub memory_budget: u64,
    pub jobs: Vec<Job>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("InfeasibleJob({id}): prompt {prompt_len} + response {response_len} exceeds budget {budget}")]
    InfeasibleJob {
        id: JobId,
        prompt_len: u64,
        response_len: u64,
        budget: u64,
    },
    #[error("EmptyInstance: an instance needs at least one job")]
    EmptyInstance,
    #[error("NonPositiveBudget: memory budget must be at least 1")]
    NonPositiveBudget,
    #[error("ZeroResponseLength({0}): every job needs at least one decode round")]
    ZeroResponseLength(JobId),
    #[error("MisnumberedJob: job at position {position} has id {id}")]
    MisnumberedJob { position: usize, id: JobId },
}

impl Instance {
    /// Builds an instance from response lengths, numbering jobs `0..n`.
    /// The result is not validated.
    pub fn from_lengths(prompt_len: u64, memory_budget: u64, lengths: &[u64]) -> Self {
        let jobs = lengths
            .iter()
            .enumerate()
            .map(|(id, &response_len)| Job { id, response_len })
            .collect();
        Self {
            prompt_len,
            memory_budget,
            jobs,
        }
    }

    /// Builds and validates in one step.
    pub fn new(prompt_len: u64, memory_budget: u64, lengths: &[u64]) -> Result<Self, ModelError> {
        validate_instance(Self::from_lengths(prompt_len, memory_budget, lengths))
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn response_len(&self, id: JobId) -> u64 {
        self.jobs[id].response_len
    }

    pub fn lengths(&self) -> Vec<u64> {
        self.jobs.iter().map(|j| j.response_len).collect()
    }

    pub fn total_work(&self) -> u64 {
        self.jobs.iter().map(|j| j.response_len).sum()
    }

    pub fn max_response_len(&self) -> u64 {
        self.jobs.iter().map(|j| j.response_len).max().unwrap_or(0)
    }

    /// Largest response length that fits the budget on its own (`M - s`).
    pub fn capacity(&self) -> u64 {
        self.memory_budget.saturating_sub(self.prompt_len)
    }

    /// Common response length if every job has the same one.
    pub fn identical_len(&self) -> Option<u64> {
        let first = self.jobs.first()?.response_len;
        self.jobs
            .iter()
            .all(|j| j.response_len == first)
            .then_some(first)
    }

    /// What a non-clairvoyant scheduler may see up front.
    pub fn shape(&self) -> InstanceShape {
        InstanceShape {
            n: self.n(),
            prompt_len: self.prompt_len,
            memory_budget: self.memory_budget,
        }
    }
}

/// The instance without response lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceShape {
    pub n: usize,
    pub prompt_len: u64,
    pub memory_budget: u64,
}

impl InstanceShape {
    pub fn capacity(&self) -> u64 {
        self.memory_budget.saturating_sub(self.prompt_len)
    }
}

pub fn validate_instance(inst: Instance) -> Result<Instance, ModelError> {
    if inst.memory_budget < 1 {
        return Err(ModelError::NonPositiveBudget);
    }
    if inst.jobs.is_empty() {
        return Err(ModelError::EmptyInstance);
    }
    for (position, job) in inst.jobs.iter().enumerate() {
        if job.id != position {
            return Err(ModelError::MisnumberedJob {
                position,
                id: job.id,
            });
        }
        if job.response_len == 0 {
            return Err(ModelError::ZeroResponseLength(job.id));
        }
        if inst.prompt_len + job.response_len > inst.memory_budget {
            return Err(ModelError::InfeasibleJob {
                id: job.id,
                prompt_len: inst.prompt_len,
                response_len: job.response_len,
                budget: inst.memory_budget,
            });
        }
    }
    Ok(inst)
}
