//! Comparison policies: shortest-first with a memory projection, FCFS with
//! newest-first eviction, and kill-the-least-progressed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{Batch, Policy, RoundView};
use crate::model::{Instance, JobId};

/// Clairvoyant shortest-first. A waiting job is admitted only if the current
/// batch plus the job, left to run to completion with no further admissions,
/// never exceeds the budget. Admission stops at the first job that fails.
#[derive(Debug, Clone)]
pub struct McSf {
    lengths: Vec<u64>,
    order: Vec<JobId>,
}

impl McSf {
    pub fn new(inst: &Instance) -> Self {
        let lengths = inst.lengths();
        let mut order: Vec<JobId> = (0..inst.n()).collect();
        order.sort_by_key(|&j| (lengths[j], j));
        Self { lengths, order }
    }

    /// Peak of `sum (s + u + d + 1)` over the rounds each job is still
    /// running. Memory only drops when a job leaves, so it suffices to look
    /// at each job's last round.
    fn projected_peak(running: &mut [(u64, u64)], s: u64) -> u64 {
        // (remaining rounds, progress), longest remaining first.
        running.sort_unstable_by_key(|r| std::cmp::Reverse(r.0));
        let mut peak = 0;
        let mut base = 0u64;
        for (i, &(rem, u)) in running.iter().enumerate() {
            base += s + u + 1;
            // Rounds ahead until the i-th longest job finishes.
            let d = rem - 1;
            peak = peak.max(base + (i as u64 + 1) * d);
        }
        peak
    }
}

impl Policy for McSf {
    fn name(&self) -> &str {
        "mc-sf"
    }

    fn decide(&mut self, view: &RoundView<'_>) -> Batch {
        let s = view.prompt_len;
        let mut active = view.previous.to_vec();
        let mut running: Vec<(u64, u64)> = active
            .iter()
            .map(|&j| (self.lengths[j] - view.progress[j], view.progress[j]))
            .collect();
        self.order.retain(|&j| !view.finished[j]);
        for &j in &self.order {
            if view.was_running(j) {
                continue;
            }
            let mut trial = running.clone();
            trial.push((self.lengths[j], 0));
            if Self::projected_peak(&mut trial, s) > view.memory_budget {
                break;
            }
            running = trial;
            active.push(j);
        }
        Batch::of(active)
    }
}

/// FCFS by id. When the running jobs no longer fit, the largest-id ones are
/// evicted (progress lost) and go back to the queue; then queue heads are
/// admitted while this round still fits.
#[derive(Debug, Clone, Default)]
pub struct VllmFcfs;

impl Policy for VllmFcfs {
    fn name(&self) -> &str {
        "vllm"
    }

    fn decide(&mut self, view: &RoundView<'_>) -> Batch {
        let mut keep = view.previous.to_vec();
        let mut used: u64 = keep.iter().map(|&j| view.cost(j, false)).sum();
        while used > view.memory_budget {
            let j = keep.pop().expect("a lone job always fits");
            used -= view.cost(j, false);
        }
        let mut active = keep.clone();
        let mut restarted = Vec::new();
        let fresh = view.prompt_len + 1;
        for j in view.unfinished() {
            if keep.binary_search(&j).is_ok() {
                continue;
            }
            if used + fresh > view.memory_budget {
                break;
            }
            used += fresh;
            active.push(j);
            if view.was_running(j) {
                restarted.push(j);
            }
        }
        Batch { active, restarted }
    }
}

/// Non-clairvoyant kill-the-least-progressed. Each job carries a length
/// estimate, the best progress it has shown plus one. Overflow kills running
/// jobs in ascending estimate; admission takes waiting jobs in ascending
/// estimate while the round fits. Ties break at random.
#[derive(Debug, Clone)]
pub struct AMin {
    estimate: Vec<u64>,
    rng: ChaCha8Rng,
}

impl AMin {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            estimate: vec![1; n],
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn ranked(&mut self, jobs: impl Iterator<Item = JobId>) -> Vec<JobId> {
        let mut keyed: Vec<(u64, u64, JobId)> = jobs
            .map(|j| (self.estimate[j], self.rng.gen::<u64>(), j))
            .collect();
        keyed.sort_unstable();
        keyed.into_iter().map(|(_, _, j)| j).collect()
    }
}

impl Policy for AMin {
    fn name(&self) -> &str {
        "a-min"
    }

    fn decide(&mut self, view: &RoundView<'_>) -> Batch {
        for &j in view.previous {
            self.estimate[j] = self.estimate[j].max(view.progress[j] + 1);
        }
        let mut used: u64 = view.previous.iter().map(|&j| view.cost(j, false)).sum();
        let mut keep = vec![false; view.n()];
        for &j in view.previous {
            keep[j] = true;
        }
        if used > view.memory_budget {
            for j in self.ranked(view.previous.iter().copied()) {
                if used <= view.memory_budget {
                    break;
                }
                keep[j] = false;
                used -= view.cost(j, false);
            }
        }
        let mut active: Vec<JobId> = view.previous.iter().copied().filter(|&j| keep[j]).collect();
        let mut restarted = Vec::new();
        let fresh = view.prompt_len + 1;
        if used + fresh <= view.memory_budget {
            let waiting = self.ranked(view.unfinished().filter(|&j| !keep[j]));
            for j in waiting {
                if used + fresh > view.memory_budget {
                    break;
                }
                used += fresh;
                active.push(j);
                if view.was_running(j) {
                    restarted.push(j);
                }
            }
        }
        Batch { active, restarted }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_matches_round_by_round_sum() {
        let cases: &[&[(u64, u64)]] = &[&[(3, 0)], &[(2, 1), (4, 0)], &[(1, 5), (1, 0), (6, 2)]];
        for &jobs in cases {
            let s = 2;
            let horizon = jobs.iter().map(|j| j.0).max().unwrap();
            let brute = (0..horizon)
                .map(|d| {
                    jobs.iter()
                        .filter(|j| j.0 > d)
                        .map(|j| s + j.1 + d + 1)
                        .sum::<u64>()
                })
                .max()
                .unwrap();
            let mut v = jobs.to_vec();
            assert_eq!(McSf::projected_peak(&mut v, s), brute);
        }
    }
}
