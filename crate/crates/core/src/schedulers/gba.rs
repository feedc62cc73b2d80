//! Geometric batching and its refill variant. Both are clairvoyant and never
//! kill, so they reduce to a start round per job.

use crate::model::{Instance, JobId};

use super::geometric::GeometricConfig;
use super::sps::sps_plan_at;
use super::SchedulerError;

/// Class `p` runs as one pipeline with `(k*(tau_p), tau_p)`, starting the
/// round after the previous class's last job completes. Empty classes take
/// no time.
pub fn gba_starts(inst: &Instance, cfg: &GeometricConfig) -> Result<Vec<u64>, SchedulerError> {
    let ks = cfg.parallelism(inst.prompt_len, inst.memory_budget)?;
    let mut starts = vec![0u64; inst.n()];
    let mut clock = 0u64;
    for (p, class) in cfg.classes(inst).iter().enumerate() {
        if class.is_empty() {
            continue;
        }
        let plan = sps_plan_at(class, ks[p], cfg.slice_int[p], clock);
        let mut phase_end = clock;
        for slot in &plan.slots {
            starts[slot.job] = slot.start;
            phase_end = phase_end.max(slot.start + inst.response_len(slot.job));
        }
        clock = phase_end;
    }
    Ok(starts)
}

/// Memory held by a job at each round of a plan.
fn profile(inst: &Instance, starts: &[u64]) -> Vec<u64> {
    let end = (0..inst.n())
        .map(|j| starts[j] + inst.response_len(j))
        .max()
        .unwrap_or(0);
    let mut mem = vec![0u64; end as usize];
    for (j, &st) in starts.iter().enumerate() {
        for d in 0..inst.response_len(j) {
            mem[(st + d) as usize] += inst.prompt_len + d + 1;
        }
    }
    mem
}

/// The batching plan plus early refills. Each job that completes frees its
/// pipeline slot; in that round the shortest job not yet started is pulled
/// forward into it if it fits for its whole lifetime on top of the plan and
/// earlier refills. A refilled job's planned slot is released but never
/// handed to another job of the plan, so no planned start moves.
pub fn gba_d_starts(inst: &Instance, cfg: &GeometricConfig) -> Result<Vec<u64>, SchedulerError> {
    let baseline = gba_starts(inst, cfg)?;
    let mut committed = profile(inst, &baseline);
    let horizon = committed.len();
    let mut refill = vec![0u64; horizon];
    // Completions per round under the current starts.
    let mut freed = vec![0usize; horizon + 1];
    for (j, &st) in baseline.iter().enumerate() {
        freed[(st + inst.response_len(j)) as usize] += 1;
    }
    let mut starts = baseline.clone();
    let mut order: Vec<JobId> = (0..inst.n()).collect();
    order.sort_by_key(|&j| (inst.response_len(j), j));
    let mut open = vec![true; inst.n()];
    let s = inst.prompt_len;

    for t in 0..horizon as u64 {
        order.retain(|&j| open[j] && baseline[j] > t);
        let mut slots = freed[t as usize];
        let mut next = 0;
        while slots > 0 && next < order.len() {
            let job = order[next];
            let o = inst.response_len(job);
            let fits = (0..o).all(|d| {
                let r = (t + d) as usize;
                committed[r] + refill[r] + s + d < inst.memory_budget
            });
            if !fits {
                break;
            }
            for d in 0..o {
                refill[(t + d) as usize] += s + d + 1;
                committed[(baseline[job] + d) as usize] -= s + d + 1;
            }
            freed[(baseline[job] + o) as usize] -= 1;
            freed[(t + o) as usize] += 1;
            starts[job] = t;
            open[job] = false;
            slots -= 1;
            next += 1;
        }
    }
    Ok(starts)
}
