//! Replays a fixed start round per job; every job runs to completion.

use crate::engine::{Batch, Policy, RoundView};
use crate::model::JobId;

#[derive(Debug, Clone)]
pub struct StaticPlan {
    name: String,
    /// `(start, job)`, ascending.
    queue: Vec<(u64, JobId)>,
    next: usize,
}

impl StaticPlan {
    pub fn new(name: impl Into<String>, starts: &[u64]) -> Self {
        let mut queue: Vec<(u64, JobId)> = starts.iter().enumerate().map(|(j, &s)| (s, j)).collect();
        queue.sort_unstable();
        Self {
            name: name.into(),
            queue,
            next: 0,
        }
    }

    pub fn starts(&self) -> Vec<u64> {
        let mut out = vec![0; self.queue.len()];
        for &(s, j) in &self.queue {
            out[j] = s;
        }
        out
    }
}

impl Policy for StaticPlan {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, view: &RoundView<'_>) -> Batch {
        let mut active = view.previous.to_vec();
        while let Some(&(start, job)) = self.queue.get(self.next) {
            if start > view.round {
                break;
            }
            self.next += 1;
            if !view.finished[job] && !view.was_running(job) {
                active.push(job);
            }
        }
        Batch::of(active)
    }
}
