//! Instance and policy flags shared by `run` and `sweep`.

use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::{Args, ValueEnum};

use kvsched::rational::{self, Rational};
use kvsched::workloads::{self, SimsFamily, TwoPointOrder};
use kvsched::{Instance, PolicyKind, PolicyParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Identical,
    TwoPoint,
    Trap,
    SimsLb2,
    SimsLb3,
    Trace,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Instance family.
    #[arg(long = "gen", value_enum, default_value = "identical")]
    pub generator: Generator,
    /// Job count (identical, trap, sims families); record limit for traces.
    #[arg(long)]
    pub n: Option<usize>,
    /// Response length (identical, sims families).
    #[arg(long)]
    pub o: Option<u64>,
    /// Prompt length.
    #[arg(long, default_value_t = 0)]
    pub s: u64,
    /// KV-cache budget.
    #[arg(long = "M")]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 194)]
    pub n_short: usize,
    #[arg(long, default_value_t = 1)]
    pub o_short: u64,
    #[arg(long, default_value_t = 6)]
    pub n_long: usize,
    #[arg(long, default_value_t = 160)]
    pub o_long: u64,
    /// Shuffle two-point job ids with this seed instead of long-first.
    #[arg(long)]
    pub shuffle: Option<u64>,
    /// Trap exponent: the long job has length 2^ell.
    #[arg(long, default_value_t = 10)]
    pub ell: u32,
    /// Batch count per simultaneous round (sims-lb2).
    #[arg(long, default_value_t = 8)]
    pub batch: u64,
    #[arg(long, default_value_t = 2)]
    pub delta: u64,
    /// Response-length file for `--gen trace`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Round every response length up to a power of two.
    #[arg(long)]
    pub pow2: bool,
}

fn need<T>(value: Option<T>, flag: &str, generator: Generator) -> Result<T> {
    value.ok_or_else(|| anyhow!("MissingParameter: --{flag} is required for {generator:?}"))
}

impl InstanceArgs {
    pub fn build(&self) -> Result<Instance> {
        let g = self.generator;
        let inst = match g {
            Generator::Identical => workloads::gen_identical(
                need(self.n, "n", g)?,
                self.s,
                need(self.o, "o", g)?,
                need(self.budget, "M", g)?,
            )?,
            Generator::TwoPoint => {
                let order = self.shuffle.map_or(TwoPointOrder::LongFirst, TwoPointOrder::Shuffled);
                workloads::gen_two_point_ordered(
                    self.n_short,
                    self.o_short,
                    self.n_long,
                    self.o_long,
                    self.s,
                    need(self.budget, "M", g)?,
                    order,
                )?
            }
            Generator::Trap => workloads::gen_long_job_trap(self.n.unwrap_or(8), self.ell)?,
            Generator::SimsLb2 => workloads::gen_sims_adversarial(SimsFamily::NearTwo {
                o: need(self.o, "o", g)?,
                batch: self.batch,
                n: need(self.n, "n", g)?,
            })?,
            Generator::SimsLb3 => workloads::gen_sims_adversarial(SimsFamily::NearThree {
                o: need(self.o, "o", g)?,
                delta: self.delta,
                n: need(self.n, "n", g)?,
            })?,
            Generator::Trace => {
                let path = need(self.trace.as_ref(), "trace", g)?;
                workloads::load_trace(path, self.s, need(self.budget, "M", g)?, self.n)?.0
            }
        };
        Ok(if self.pow2 { workloads::round_pow2(&inst)? } else { inst })
    }
}

#[derive(Debug, Clone, Args)]
pub struct PolicyArgs {
    /// Geometric scaling factor, as p/q or a decimal.
    #[arg(long, default_value = "2")]
    pub alpha: String,
    /// Base slice override (>= 1), as p/q or a decimal.
    #[arg(long)]
    pub beta: Option<String>,
    /// Pipeline width for raw sps runs; defaults to the largest feasible.
    #[arg(long)]
    pub k: Option<u64>,
    /// Slice length for raw sps runs; defaults to the longest response.
    #[arg(long)]
    pub tau: Option<u64>,
    /// Seed for randomized policies.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Round cap for the simulation.
    #[arg(long)]
    pub horizon: Option<u64>,
}

impl PolicyArgs {
    pub fn alpha(&self) -> Result<Rational> {
        Ok(rational::parse(&self.alpha)?)
    }

    pub fn beta(&self) -> Result<Option<Rational>> {
        self.beta.as_deref().map(rational::parse).transpose().map_err(Into::into)
    }

    pub fn params(&self, kind: PolicyKind) -> Result<PolicyParams> {
        Ok(PolicyParams::new(kind)
            .with_alpha(self.alpha()?)
            .with_beta(self.beta()?)
            .with_seed(self.seed)
            .with_pipeline(self.k, self.tau))
    }
}

pub fn parse_policy(text: &str) -> Result<PolicyKind, String> {
    text.parse::<PolicyKind>().map_err(|e| e.to_string())
}
