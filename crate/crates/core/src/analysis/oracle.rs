//! Exhaustive optimum for tiny instances.
//!
//! Only non-preemptive schedules are searched: each job gets one start time
//! and runs to completion. An optimal schedule never needs to kill or pause.

use crate::model::{Instance, JobId};

use super::AnalysisError;

pub const MAX_JOBS: usize = 8;
pub const MAX_HORIZON: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub flow: u64,
    /// Start round per job id.
    pub starts: Vec<u64>,
}

struct Search<'a> {
    inst: &'a Instance,
    order: Vec<JobId>,
    /// Suffix sums of response lengths along `order`.
    tail_work: Vec<u64>,
    horizon: u64,
    memory: Vec<u64>,
    starts: Vec<u64>,
    best: OracleSolution,
}

impl Search<'_> {
    fn fits(&self, start: u64, o: u64) -> bool {
        let s = self.inst.prompt_len;
        (0..o).all(|d| self.memory[(start + d) as usize] + s + d < self.inst.memory_budget)
    }

    fn place(&mut self, start: u64, o: u64, sign: bool) {
        let s = self.inst.prompt_len;
        for d in 0..o {
            let cell = &mut self.memory[(start + d) as usize];
            if sign {
                *cell += s + d + 1;
            } else {
                *cell -= s + d + 1;
            }
        }
    }

    fn dfs(&mut self, depth: usize, flow: u64) {
        if depth == self.order.len() {
            if flow < self.best.flow {
                self.best = OracleSolution {
                    flow,
                    starts: self.starts.clone(),
                };
            }
            return;
        }
        if flow + self.tail_work[depth] >= self.best.flow {
            return;
        }
        let job = self.order[depth];
        let o = self.inst.response_len(job);
        // Jobs of equal length are interchangeable: keep their starts sorted.
        let lo = match depth.checked_sub(1).map(|d| self.order[d]) {
            Some(prev) if self.inst.response_len(prev) == o => self.starts[prev],
            _ => 0,
        };
        for start in lo..=self.horizon {
            if flow + start + self.tail_work[depth] >= self.best.flow {
                break;
            }
            if !self.fits(start, o) {
                continue;
            }
            self.place(start, o, true);
            self.starts[job] = start;
            self.dfs(depth + 1, flow + start + o);
            self.place(start, o, false);
        }
    }
}

/// Minimum total flow over start-time schedules with starts in
/// `[0, horizon]`. The default horizon is `sum(o_i)`.
pub fn brute_force_opt(inst: &Instance, horizon: Option<u64>) -> Result<OracleSolution, AnalysisError> {
    let n = inst.n();
    let horizon = horizon.unwrap_or_else(|| inst.total_work());
    if n > MAX_JOBS || horizon > MAX_HORIZON {
        return Err(AnalysisError::GuardRail {
            n,
            horizon,
            max_jobs: MAX_JOBS,
            max_horizon: MAX_HORIZON,
        });
    }
    let mut order: Vec<JobId> = (0..n).collect();
    order.sort_by_key(|&j| (std::cmp::Reverse(inst.response_len(j)), j));
    let mut tail_work = vec![0u64; n + 1];
    for i in (0..n).rev() {
        tail_work[i] = tail_work[i + 1] + inst.response_len(order[i]);
    }

    // Shortest-first back to back is always feasible; seed the bound with it
    // when it stays inside the horizon.
    let mut seq: Vec<JobId> = (0..n).collect();
    seq.sort_by_key(|&j| (inst.response_len(j), j));
    let mut starts = vec![0u64; n];
    let mut clock = 0;
    let mut flow = 0;
    for &j in &seq {
        starts[j] = clock;
        clock += inst.response_len(j);
        flow += clock;
    }
    let seed = if seq.last().is_none_or(|&j| starts[j] <= horizon) {
        OracleSolution { flow, starts }
    } else {
        OracleSolution {
            flow: u64::MAX,
            starts: Vec::new(),
        }
    };

    let mut search = Search {
        inst,
        order,
        tail_work,
        horizon,
        memory: vec![0; (horizon + inst.max_response_len() + 1) as usize],
        starts: vec![0; n],
        best: seed,
    };
    search.dfs(0, 0);
    if search.best.flow == u64::MAX {
        return Err(AnalysisError::NoScheduleWithinHorizon(horizon));
    }
    Ok(search.best)
}
