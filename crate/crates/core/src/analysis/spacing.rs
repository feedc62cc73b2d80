//! Start-time spacing for identical jobs: with `k = k*(tau, s)`, any feasible
//! schedule has `S_{i+k} - S_i >= ceil(tau/2)` on its sorted starts.

use crate::model::Instance;
use crate::timeline::Timeline;

use super::formulas::max_parallelism;
use super::AnalysisError;

/// Checks the spacing condition on a kill-free timeline of identical jobs.
pub fn spacing_check(tl: &Timeline, inst: &Instance) -> Result<bool, AnalysisError> {
    let tau = inst.identical_len().ok_or(AnalysisError::NonIdenticalJobs)?;
    if !tl.kills.is_empty() {
        return Err(AnalysisError::PreemptiveTimeline);
    }
    let mut starts: Vec<u64> = tl
        .final_starts()
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(AnalysisError::IncompleteTimeline)?;
    starts.sort_unstable();
    spacing_holds(&starts, tau, inst.prompt_len, inst.memory_budget)
}

/// Same check on a bare list of sorted start times.
pub fn spacing_holds(sorted_starts: &[u64], tau: u64, s: u64, budget: u64) -> Result<bool, AnalysisError> {
    let k = max_parallelism(tau, s, budget)? as usize;
    let gap = tau.div_ceil(2);
    Ok(sorted_starts
        .iter()
        .zip(sorted_starts.iter().skip(k))
        .all(|(a, b)| b - a >= gap))
}
