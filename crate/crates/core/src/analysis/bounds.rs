//! Per-phase terms, the multi-class area lower bound, and the ratio bounds.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;

use crate::model::Instance;
use crate::rational::{from_u64, Rational};
use crate::schedulers::geometric::GeometricConfig;
use crate::schedulers::SchedulerError;

use super::formulas::area_rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseStats {
    pub phase: usize,
    pub tau: u64,
    pub n_p: u64,
    pub k_p: u64,
    /// Jobs in later classes.
    pub n_gt: u64,
    /// Jobs in this class or later.
    pub n_ge: u64,
    pub area_p: Rational,
    pub q_p: u64,
    pub s_p: u64,
    pub delta_p: u64,
    pub t_p: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub alpha: Rational,
    pub beta: Rational,
    pub within_class: Rational,
    pub between_classes: Rational,
    pub opt_lb: Rational,
    pub gba_ub: u64,
    pub gsa_ub: u64,
    /// Smallest `k_p` over phases that hold jobs.
    pub k_min: u64,
    pub gamma_gba: Rational,
    pub gamma_gsa: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics {
    pub phases: Vec<PhaseStats>,
    pub report: BoundReport,
}

impl Diagnostics {
    pub fn sum_n_s(&self) -> u64 {
        self.phases.iter().map(|p| p.n_p * p.s_p).sum()
    }
    pub fn sum_q(&self) -> u64 {
        self.phases.iter().map(|p| p.q_p).sum()
    }
    pub fn sum_n_delta(&self) -> u64 {
        self.phases.iter().map(|p| p.n_p * p.delta_p).sum()
    }
    pub fn sum_n_t(&self) -> u64 {
        self.phases.iter().map(|p| p.n_p * p.t_p).sum()
    }

    /// `sum n_p Delta_p <= sum n_p S_p + sum Q_p`.
    pub fn spillover_bound_holds(&self) -> bool {
        self.sum_n_delta() <= self.sum_n_s() + self.sum_q()
    }

    /// `sum n_p T_p <= (1 + 2/(alpha-1)) sum n_p S_p + (2/(alpha-1)) sum Q_p`.
    pub fn prefix_bound_holds(&self) -> bool {
        let alpha = &self.report.alpha;
        let two = from_u64(2);
        let c = &two / (alpha - Rational::one());
        let rhs = (Rational::one() + &c) * from_u64(self.sum_n_s()) + c * from_u64(self.sum_q());
        from_u64(self.sum_n_t()) <= rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Gba,
    Gsa,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Gba => "gba",
            BoundKind::Gsa => "gsa",
        })
    }
}

impl FromStr for BoundKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gba" => Ok(BoundKind::Gba),
            "gsa" => Ok(BoundKind::Gsa),
            other => Err(format!("unknown bound kind {other:?}")),
        }
    }
}

/// `alpha^2 (1 + 2/k_min) + alpha + alpha/(alpha-1)` for GBA, times
/// `2 + 2/(alpha-1)` for GSA. `k_min = None` drops the `2/k_min` term.
pub fn theorem_bound(kind: BoundKind, alpha: &Rational, k_min: Option<u64>) -> Rational {
    let one = Rational::one();
    let two = from_u64(2);
    let stagger = match k_min {
        Some(k) => &one + &two / from_u64(k),
        None => one.clone(),
    };
    let gap = alpha - &one;
    let gba = alpha * alpha * stagger + alpha + alpha / &gap;
    match kind {
        BoundKind::Gba => gba,
        BoundKind::Gsa => (two.clone() + two / gap) * gba,
    }
}

fn floor_div(a: u64, b: u64) -> u64 {
    a / b
}

/// Phase terms and bounds for classes formed as the batching scheduler forms
/// them.
pub fn phase_diagnostics(
    inst: &Instance,
    alpha: &Rational,
    beta: Option<&Rational>,
) -> Result<Diagnostics, SchedulerError> {
    let cfg = GeometricConfig::for_instance(inst, alpha, beta)?;
    diagnostics_for(inst, &cfg)
}

pub fn diagnostics_for(inst: &Instance, cfg: &GeometricConfig) -> Result<Diagnostics, SchedulerError> {
    let ks = cfg.parallelism(inst.prompt_len, inst.memory_budget)?;
    let counts: Vec<u64> = cfg.classes(inst).iter().map(|c| c.len() as u64).collect();
    let phases_n = cfg.phases();
    let budget = from_u64(inst.memory_budget);
    let two = BigInt::from(2);

    let mut phases = Vec::with_capacity(phases_n);
    let mut s_acc = 0u64;
    let mut t_acc = 0u64;
    let mut within = Rational::from_integer(BigInt::from(0));
    let mut between = within.clone();
    for p in 0..phases_n {
        let n_p = counts[p];
        let n_gt: u64 = counts[p + 1..].iter().sum();
        let n_ge = n_p + n_gt;
        let tau = cfg.slice_int[p];
        let k = ks[p];
        let q_p = n_p * tau + (0..n_p).map(|i| floor_div(i * tau, k)).sum::<u64>();
        let delta_p = (n_gt * tau).div_ceil(k);
        let area_p = area_rational(&cfg.class_floor(p), inst.prompt_len);
        let weight = &area_p / &budget;
        within += &weight * Rational::new(BigInt::from(n_p) * BigInt::from(n_p + 1), two.clone());
        between += &weight * from_u64(n_gt * n_p);
        phases.push(PhaseStats {
            phase: p,
            tau,
            n_p,
            k_p: k,
            n_gt,
            n_ge,
            area_p,
            q_p,
            s_p: s_acc,
            delta_p,
            t_p: t_acc,
        });
        s_acc += floor_div(n_p * tau, k) + tau;
        t_acc += floor_div(n_ge * tau, k) + tau;
    }

    let gba_ub = phases.iter().map(|p| p.n_p * p.s_p + p.q_p).sum();
    let gsa_ub = phases
        .iter()
        .map(|p| p.n_p * (p.t_p + p.delta_p) + p.q_p)
        .sum();
    let k_min = phases
        .iter()
        .filter(|p| p.n_p > 0)
        .map(|p| p.k_p)
        .min()
        .unwrap_or(1);
    let report = BoundReport {
        alpha: cfg.alpha.clone(),
        beta: cfg.beta.clone(),
        opt_lb: &within + &between,
        within_class: within,
        between_classes: between,
        gba_ub,
        gsa_ub,
        k_min,
        gamma_gba: theorem_bound(BoundKind::Gba, &cfg.alpha, Some(k_min)),
        gamma_gsa: theorem_bound(BoundKind::Gsa, &cfg.alpha, Some(k_min)),
    };
    Ok(Diagnostics { phases, report })
}

/// Within/between-class area bound only.
pub fn opt_lb_multiclass(
    inst: &Instance,
    alpha: &Rational,
    beta: Option<&Rational>,
) -> Result<BoundReport, SchedulerError> {
    phase_diagnostics(inst, alpha, beta).map(|d| d.report)
}
