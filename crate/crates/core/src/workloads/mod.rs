//! Instance families and trace ingestion.

mod trace;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Instance, ModelError};

pub use trace::{load_trace, load_trace_from_str, LoadReport, TraceRecord};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("InvalidParameters: {0}")]
    InvalidParameters(String),
    #[error("FileNotFound: {0}")]
    FileNotFound(String),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("ParseError({line}): {message}")]
    ParseError { line: usize, message: String },
    #[error("AllRecordsInfeasible: none of {total} records fit the budget")]
    AllRecordsInfeasible { total: usize },
}

pub fn gen_identical(n: usize, s: u64, o: u64, budget: u64) -> Result<Instance, ModelError> {
    Instance::new(s, budget, &vec![o; n])
}

/// Order of jobs in a two-point instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TwoPointOrder {
    /// Long jobs take the lowest ids.
    #[default]
    LongFirst,
    /// Ids assigned after a seeded shuffle.
    Shuffled(u64),
}

pub fn gen_two_point(
    n_short: usize,
    o_short: u64,
    n_long: usize,
    o_long: u64,
    s: u64,
    budget: u64,
) -> Result<Instance, ModelError> {
    gen_two_point_ordered(n_short, o_short, n_long, o_long, s, budget, TwoPointOrder::LongFirst)
}

pub fn gen_two_point_ordered(
    n_short: usize,
    o_short: u64,
    n_long: usize,
    o_long: u64,
    s: u64,
    budget: u64,
    order: TwoPointOrder,
) -> Result<Instance, ModelError> {
    let mut lengths = vec![o_long; n_long];
    lengths.extend(std::iter::repeat_n(o_short, n_short));
    if let TwoPointOrder::Shuffled(seed) = order {
        lengths.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    Instance::new(s, budget, &lengths)
}

/// One job of length `2^ell` (id 0) and `n - 1` unit jobs, with
/// `s = 2^ell` and `M = 2^(ell+1)`.
pub fn gen_long_job_trap(n: usize, ell: u32) -> Result<Instance, WorkloadError> {
    if n < 2 || !(1..=40).contains(&ell) {
        return Err(WorkloadError::InvalidParameters(format!(
            "trap needs n >= 2 and 1 <= ell <= 40, got n={n}, ell={ell}"
        )));
    }
    let half = 1u64 << ell;
    let mut lengths = vec![1; n];
    lengths[0] = half;
    Ok(Instance::new(half, 2 * half, &lengths)?)
}

/// `n(n+1)/2 + 2^ell - 1`: unit jobs one per round, then the long job.
pub fn long_job_trap_opt(n: usize, ell: u32) -> u64 {
    let n = n as u64;
    n * (n + 1) / 2 + (1u64 << ell) - 1
}

/// The bound `(n+2)(n-1)/2 + n + 2^(ell+1) - 2` on slicing with `alpha = 2`.
pub fn long_job_trap_gsa_bound(n: usize, ell: u32) -> u64 {
    let n = n as u64;
    (n + 2) * (n - 1) / 2 + n + (1u64 << (ell + 1)) - 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimsFamily {
    /// `s = 0`, `M = o * batch`, `n` a multiple of `batch`.
    NearTwo { o: u64, batch: u64, n: usize },
    /// `s = 0`, `o` a multiple of 3, `M = 2o - 3*delta + 3`, so only one job
    /// fits per simultaneous batch.
    NearThree { o: u64, delta: u64, n: usize },
}

pub fn gen_sims_adversarial(family: SimsFamily) -> Result<Instance, WorkloadError> {
    let bad = |m: String| Err(WorkloadError::InvalidParameters(m));
    match family {
        SimsFamily::NearTwo { o, batch, n } => {
            if o == 0 || batch == 0 || n == 0 || !(n as u64).is_multiple_of(batch) {
                return bad(format!("lb2 needs o, B >= 1 and B | n, got o={o}, B={batch}, n={n}"));
            }
            Ok(gen_identical(n, 0, o, o * batch)?)
        }
        SimsFamily::NearThree { o, delta, n } => {
            if o == 0 || o % 3 != 0 || delta < 2 || n == 0 {
                return bad(format!("lb3 needs 3 | o and delta >= 2, got o={o}, delta={delta}"));
            }
            if 3 * delta >= o + 3 {
                return bad(format!("lb3 needs 3*delta < o + 3, got o={o}, delta={delta}"));
            }
            Ok(gen_identical(n, 0, o, 2 * o + 3 - 3 * delta)?)
        }
    }
}

/// Rounds each length up to a power of two.
pub fn round_pow2(inst: &Instance) -> Result<Instance, ModelError> {
    let lengths: Vec<u64> = inst.jobs.iter().map(|j| j.response_len.next_power_of_two()).collect();
    Instance::new(inst.prompt_len, inst.memory_budget, &lengths)
}
