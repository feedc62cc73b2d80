//! Scheduling policies and a uniform way to build and run them.

pub mod baselines;
pub mod gba;
pub mod geometric;
pub mod pipeline;
pub mod plan;
pub mod sps;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::analysis::{formulas::max_parallelism, AnalysisError};
use crate::engine::{simulate_with, Policy, SimError, SimOptions};
use crate::model::Instance;
use crate::rational::{from_u64, Rational};
use crate::timeline::Timeline;

pub use baselines::{AMin, McSf, VllmFcfs};
pub use geometric::GeometricConfig;
pub use pipeline::{Gsa, GsaSpec};
pub use plan::StaticPlan;
pub use sps::{sps_plan, SpsPlan, SpsSlot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchedulerError {
    #[error("InvalidAlpha: alpha must exceed 1, got {0}")]
    InvalidAlpha(String),
    #[error("InvalidBeta: beta must be at least 1, got {0}")]
    InvalidBeta(String),
    #[error("InvalidCapacity: the budget leaves no room beyond the prompt")]
    InvalidCapacity,
    #[error("InvalidPipeline: need k >= 1 and tau >= 1, got k={k}, tau={tau}")]
    InvalidPipeline { k: u64, tau: u64 },
    #[error("SliceTooShort: tau {tau} is below the longest response {longest}")]
    SliceTooShort { tau: u64, longest: u64 },
    #[error("NonIdenticalJobs: this policy needs a single response length")]
    NonIdenticalJobs,
    #[error("UnknownPolicy: {0}")]
    UnknownPolicy(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Sps,
    Gba,
    Gsa,
    Sims,
    McSf,
    AMin,
    Vllm,
    GbaD,
    GsaSpec,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 9] = [
        PolicyKind::Sps,
        PolicyKind::Gba,
        PolicyKind::Gsa,
        PolicyKind::Sims,
        PolicyKind::McSf,
        PolicyKind::AMin,
        PolicyKind::Vllm,
        PolicyKind::GbaD,
        PolicyKind::GsaSpec,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Sps => "sps",
            PolicyKind::Gba => "gba",
            PolicyKind::Gsa => "gsa",
            PolicyKind::Sims => "sims",
            PolicyKind::McSf => "mc-sf",
            PolicyKind::AMin => "a-min",
            PolicyKind::Vllm => "vllm",
            PolicyKind::GbaD => "gba-d",
            PolicyKind::GsaSpec => "gsa-spec",
        }
    }

    pub fn uses_alpha(self) -> bool {
        matches!(
            self,
            PolicyKind::Gba | PolicyKind::Gsa | PolicyKind::GbaD | PolicyKind::GsaSpec
        )
    }

    pub fn is_randomized(self) -> bool {
        self == PolicyKind::AMin
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = SchedulerError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| SchedulerError::UnknownPolicy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyParams {
    pub kind: PolicyKind,
    pub alpha: Rational,
    pub beta: Option<Rational>,
    pub seed: u64,
    /// Raw pipeline parallelism; defaults to `k*` for the chosen slice.
    pub k: Option<u64>,
    /// Raw pipeline slice; defaults to the longest response.
    pub tau: Option<u64>,
}

impl PolicyParams {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            alpha: from_u64(2),
            beta: None,
            seed: 0,
            k: None,
            tau: None,
        }
    }

    pub fn with_alpha(mut self, alpha: Rational) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: Option<Rational>) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_pipeline(mut self, k: Option<u64>, tau: Option<u64>) -> Self {
        self.k = k;
        self.tau = tau;
        self
    }
}

pub fn build_policy(inst: &Instance, params: &PolicyParams) -> Result<Box<dyn Policy>, SchedulerError> {
    let geometric = || GeometricConfig::for_instance(inst, &params.alpha, params.beta.as_ref());
    Ok(match params.kind {
        PolicyKind::Sps => {
            let tau = params.tau.unwrap_or_else(|| inst.max_response_len());
            let k = match params.k {
                Some(k) => k,
                None => max_parallelism(tau, inst.prompt_len, inst.memory_budget)?,
            };
            Box::new(StaticPlan::new("sps", &sps::sps_starts(inst, k, tau)?))
        }
        PolicyKind::Sims => Box::new(StaticPlan::new("sims", &sps::sims_starts(inst)?)),
        PolicyKind::Gba => Box::new(StaticPlan::new("gba", &gba::gba_starts(inst, &geometric()?)?)),
        PolicyKind::GbaD => Box::new(StaticPlan::new("gba-d", &gba::gba_d_starts(inst, &geometric()?)?)),
        PolicyKind::Gsa => Box::new(Gsa::new(&geometric()?, inst.shape())?),
        PolicyKind::GsaSpec => Box::new(GsaSpec::new(&geometric()?, inst.shape())?),
        PolicyKind::McSf => Box::new(McSf::new(inst)),
        PolicyKind::Vllm => Box::new(VllmFcfs),
        PolicyKind::AMin => Box::new(AMin::new(inst.n(), params.seed)),
    })
}

pub fn run_policy(inst: &Instance, params: &PolicyParams) -> Result<Timeline, SchedulerError> {
    run_policy_with(inst, params, &SimOptions::default())
}

pub fn run_policy_with(
    inst: &Instance,
    params: &PolicyParams,
    opts: &SimOptions,
) -> Result<Timeline, SchedulerError> {
    let mut policy = build_policy(inst, params)?;
    Ok(simulate_with(inst, policy.as_mut(), opts)?)
}

pub fn sps(inst: &Instance, k: u64, tau: u64) -> Result<Timeline, SchedulerError> {
    run_policy(inst, &PolicyParams::new(PolicyKind::Sps).with_pipeline(Some(k), Some(tau)))
}

pub fn gba(inst: &Instance, alpha: &Rational) -> Result<Timeline, SchedulerError> {
    run_policy(inst, &PolicyParams::new(PolicyKind::Gba).with_alpha(alpha.clone()))
}

pub fn gsa(inst: &Instance, alpha: &Rational, beta: Option<&Rational>) -> Result<Timeline, SchedulerError> {
    run_policy(
        inst,
        &PolicyParams::new(PolicyKind::Gsa)
            .with_alpha(alpha.clone())
            .with_beta(beta.cloned()),
    )
}

pub fn sims(inst: &Instance) -> Result<Timeline, SchedulerError> {
    run_policy(inst, &PolicyParams::new(PolicyKind::Sims))
}

pub fn mc_sf(inst: &Instance) -> Result<Timeline, SchedulerError> {
    run_policy(inst, &PolicyParams::new(PolicyKind::McSf))
}

pub fn a_min(inst: &Instance, seed: u64) -> Result<Timeline, SchedulerError> {
    run_policy(inst, &PolicyParams::new(PolicyKind::AMin).with_seed(seed))
}

pub fn vllm_fcfs(inst: &Instance) -> Result<Timeline, SchedulerError> {
    run_policy(inst, &PolicyParams::new(PolicyKind::Vllm))
}

pub fn gba_d(inst: &Instance, alpha: &Rational) -> Result<Timeline, SchedulerError> {
    run_policy(inst, &PolicyParams::new(PolicyKind::GbaD).with_alpha(alpha.clone()))
}

pub fn gsa_spec(
    inst: &Instance,
    alpha: &Rational,
    beta: Option<&Rational>,
) -> Result<Timeline, SchedulerError> {
    run_policy(
        inst,
        &PolicyParams::new(PolicyKind::GsaSpec)
            .with_alpha(alpha.clone())
            .with_beta(beta.cloned()),
    )
}
