//! Property suites over random and exhaustive instance sets. Shared by the
//! `verify` command and the test targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    brute_force_opt, diagnostics_for, formulas, opt_lb_single, BoundKind,
};
use crate::analysis::bounds::theorem_bound;
use crate::engine::simulate;
use crate::model::Instance;
use crate::rational::{format as fmt_r, from_u64, ratio, Rational};
use crate::schedulers::{
    gba::gba_starts, run_policy, GeometricConfig, PolicyKind, PolicyParams, StaticPlan,
};
use crate::timeline::{total_flow_time, verify_feasibility};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: String,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..Self::default()
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} checks, {} passed, {} failed",
            self.name,
            self.checks,
            self.checks - self.failures.len(),
            self.failures.len()
        )
    }
}

/// The slicing factors exercised by the bound suites.
pub fn standard_alphas() -> Vec<Rational> {
    vec![ratio(4, 3), ratio(3, 2), from_u64(2)]
}

/// Random instances with `n <= max_n`, `s <= 32`, `o_i <= 32` and a budget
/// between `max(s + o_i)` and a few times that.
pub fn fuzz_corpus(count: usize, seed: u64, max_n: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(1..=max_n);
            let s = rng.gen_range(0..=32u64);
            let max_o = rng.gen_range(1..=32u64);
            let lengths: Vec<u64> = if i % 5 == 0 {
                vec![max_o; n]
            } else {
                (0..n).map(|_| rng.gen_range(1..=max_o)).collect()
            };
            let need = s + lengths.iter().max().unwrap();
            let budget = need + rng.gen_range(0..=3 * need);
            Instance::new(s, budget, &lengths).expect("generated instance is feasible")
        })
        .collect()
}

/// Every tuple of `n <= 4` lengths in `[1, 4]`, `s` in `{0, 1, 2}`, and
/// budgets from `max(s + o_i)` to 12.
pub fn exhaustive_tiny() -> Vec<Instance> {
    let mut out = Vec::new();
    for n in 1..=4u32 {
        for code in 0..4u32.pow(n) {
            let lengths: Vec<u64> = (0..n).map(|d| (code / 4u32.pow(d) % 4 + 1) as u64).collect();
            for s in 0..=2 {
                let need = s + lengths.iter().max().unwrap();
                for budget in need..=12 {
                    out.push(Instance::new(s, budget, &lengths).unwrap());
                }
            }
        }
    }
    out
}

/// Peak formula against simulation, monotonicity in `k`, the parallelism
/// floor, and strict packing efficiency.
pub fn formulas_suite(samples: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("formulas");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let k = rng.gen_range(1..=40u64);
        let tau = rng.gen_range(1..=40u64);
        let s = rng.gen_range(0..=20u64);
        let peak = formulas::peak_memory(k, tau, s);
        let simulated = simulated_sps_peak(k, tau, s);
        report.check(peak == simulated, || {
            format!("peak(k={k}, tau={tau}, s={s}) = {peak}, simulated {simulated}")
        });
        let next = formulas::peak_memory(k + 1, tau, s);
        report.check(next > peak, || format!("peak not increasing at k={k}, tau={tau}, s={s}"));

        let budget = s + tau + rng.gen_range(0..=40 * (s + tau));
        let kstar = formulas::max_parallelism(tau, s, budget).unwrap();
        let floor = formulas::parallelism_floor_bound(tau, s, budget);
        report.check(kstar >= floor, || {
            format!("k*({tau},{s},{budget}) = {kstar} below floor {floor}")
        });
        report.check(
            formulas::packing_inequality_holds(tau, s, budget).unwrap(),
            || format!("packing inequality fails at tau={tau}, s={s}, M={budget}"),
        );
    }
    report
}

/// Max memory of the pipeline on `3k` jobs of length `tau`, run under an
/// unconstrained budget.
pub fn simulated_sps_peak(k: u64, tau: u64, s: u64) -> u64 {
    let n = 3 * k as usize;
    // Every job at full length at once always fits.
    let inst = Instance::new(s, (s + tau) * n as u64, &vec![tau; n]).unwrap();
    let starts: Vec<u64> = (0..n as u64).map(|j| j * tau / k).collect();
    let tl = simulate(&inst, &mut StaticPlan::new("sps", &starts)).unwrap();
    crate::timeline::memory_profile(&tl, &inst)
        .into_iter()
        .max()
        .unwrap_or(0)
}

pub fn ceiling_suite(max: u64) -> SuiteReport {
    let mut report = SuiteReport::new("ceiling");
    for n in 1..=max {
        for k in 1..=max {
            report.check(formulas::ceiling_inequality_holds(n, k), || {
                format!("ceiling inequality fails at n={n}, k={k}")
            });
        }
    }
    report
}

fn flow_of(inst: &Instance, params: &PolicyParams) -> Result<u64, String> {
    let tl = run_policy(inst, params).map_err(|e| e.to_string())?;
    total_flow_time(&tl).map_err(|e| e.to_string())
}

/// Lower bounds below the optimum and the ratio guarantees above it, on
/// every tiny instance.
pub fn oracle_suite(instances: &[Instance]) -> SuiteReport {
    let mut report = SuiteReport::new("oracle");
    for inst in instances {
        let opt = match brute_force_opt(inst, None) {
            Ok(sol) => sol.flow,
            Err(e) => {
                report.check(false, || format!("{inst:?}: oracle failed: {e}"));
                continue;
            }
        };
        let opt_r = from_u64(opt);
        let shortest = inst.jobs.iter().map(|j| j.response_len).min().unwrap();
        let single = opt_lb_single(inst.n() as u64, shortest, inst.prompt_len, inst.memory_budget);
        report.check(single <= opt_r, || format!("{inst:?}: single-class bound above OPT {opt}"));

        for alpha in standard_alphas() {
            let cfg = GeometricConfig::for_instance(inst, &alpha, None).unwrap();
            let diag = diagnostics_for(inst, &cfg).unwrap();
            let r = &diag.report;
            report.check(r.opt_lb <= opt_r, || {
                format!("{inst:?}, alpha {}: multi-class bound {} above OPT {opt}", fmt_r(&alpha), fmt_r(&r.opt_lb))
            });
            let params = |k| PolicyParams::new(k).with_alpha(alpha.clone());
            for (kind, bound) in [
                (PolicyKind::Gba, BoundKind::Gba),
                (PolicyKind::Gsa, BoundKind::Gsa),
            ] {
                match flow_of(inst, &params(kind)) {
                    Ok(flow) => {
                        let gamma = theorem_bound(bound, &alpha, Some(r.k_min));
                        report.check(from_u64(flow) <= gamma * &opt_r, || {
                            format!("{inst:?}, alpha {}: {kind} flow {flow} above bound x OPT {opt}", fmt_r(&alpha))
                        });
                    }
                    Err(e) => report.check(false, || format!("{inst:?}: {kind} failed: {e}")),
                }
            }
        }
    }
    report
}

/// Flow of a policy against the optimum on one-job instances.
pub fn single_job_suite(instances: &[Instance], kind: PolicyKind) -> SuiteReport {
    let mut report = SuiteReport::new(&format!("single-job {kind}"));
    for inst in instances.iter().filter(|i| i.n() == 1) {
        let opt = inst.response_len(0);
        for alpha in standard_alphas() {
            match flow_of(inst, &PolicyParams::new(kind).with_alpha(alpha.clone())) {
                Ok(flow) => report.check(flow == opt, || {
                    format!("o={opt}, s={}, M={}, alpha {}: flow {flow}", inst.prompt_len, inst.memory_budget, fmt_r(&alpha))
                }),
                Err(e) => report.check(false, || format!("{inst:?}: {kind} failed: {e}")),
            }
        }
    }
    report
}

/// Simulated flows against the per-phase upper bounds, and the aggregate
/// spillover and prefix inequalities.
pub fn lemmas_suite(instances: &[Instance]) -> SuiteReport {
    let mut report = SuiteReport::new("lemmas");
    let alphas = [ratio(4, 3), ratio(3, 2), from_u64(2), from_u64(3)];
    for (i, inst) in instances.iter().enumerate() {
        let alpha = &alphas[i % alphas.len()];
        let cfg = GeometricConfig::for_instance(inst, alpha, None).unwrap();
        let diag = diagnostics_for(inst, &cfg).unwrap();
        let tag = || format!("instance {i} (n={}, s={}, M={}, alpha {})", inst.n(), inst.prompt_len, inst.memory_budget, fmt_r(alpha));
        let params = |k| PolicyParams::new(k).with_alpha(alpha.clone());
        match flow_of(inst, &params(PolicyKind::Gba)) {
            Ok(f) => report.check(f <= diag.report.gba_ub, || format!("{}: gba {f} > {}", tag(), diag.report.gba_ub)),
            Err(e) => report.check(false, || format!("{}: gba failed: {e}", tag())),
        }
        match flow_of(inst, &params(PolicyKind::Gsa)) {
            Ok(f) => report.check(f <= diag.report.gsa_ub, || format!("{}: gsa {f} > {}", tag(), diag.report.gsa_ub)),
            Err(e) => report.check(false, || format!("{}: gsa failed: {e}", tag())),
        }
        report.check(diag.spillover_bound_holds(), || format!("{}: spillover sum too large", tag()));
        report.check(diag.prefix_bound_holds(), || format!("{}: prefix sum too large", tag()));
    }
    report
}

/// Every policy yields a complete timeline that passes the independent
/// checker. The simultaneous-batch baseline only runs on identical jobs.
pub fn feasibility_suite(instances: &[Instance], seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("feasibility");
    for (i, inst) in instances.iter().enumerate() {
        for kind in PolicyKind::ALL {
            if kind == PolicyKind::Sims && inst.identical_len().is_none() {
                continue;
            }
            let params = PolicyParams::new(kind).with_seed(seed.wrapping_add(i as u64));
            match run_policy(inst, &params) {
                Ok(tl) => {
                    let r = verify_feasibility(&tl, inst);
                    report.check(r.is_feasible() && tl.is_complete(), || {
                        format!("instance {i}: {kind} violations {:?}", r.violations)
                    });
                }
                Err(e) => report.check(false, || format!("instance {i}: {kind} failed: {e}")),
            }
        }
    }
    report
}

/// Refill and speculation never finish a job later than the plain schedule.
pub fn dominance_suite(instances: &[Instance]) -> SuiteReport {
    let mut report = SuiteReport::new("dominance");
    let alpha = from_u64(2);
    for (i, inst) in instances.iter().enumerate() {
        for (plain, variant) in [
            (PolicyKind::Gba, PolicyKind::GbaD),
            (PolicyKind::Gsa, PolicyKind::GsaSpec),
        ] {
            let a = run_policy(inst, &PolicyParams::new(plain).with_alpha(alpha.clone()));
            let b = run_policy(inst, &PolicyParams::new(variant).with_alpha(alpha.clone()));
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    let later = (0..inst.n()).find(|&j| b.completions[j] > a.completions[j]);
                    report.check(later.is_none(), || {
                        format!("instance {i}: {variant} finishes job {later:?} after {plain}")
                    });
                }
                (a, b) => report.check(false, || {
                    format!("instance {i}: run failed: {:?} / {:?}", a.err(), b.err())
                }),
            }
        }
    }
    report
}

/// Lengths that fit the batching plan's class boundaries exactly.
pub fn class_partition_suite(instances: &[Instance]) -> SuiteReport {
    let mut report = SuiteReport::new("classes");
    for inst in instances {
        for alpha in standard_alphas() {
            let cfg = GeometricConfig::for_instance(inst, &alpha, None).unwrap();
            let classes = cfg.classes(inst);
            report.check(classes.iter().map(Vec::len).sum::<usize>() == inst.n(), || {
                format!("{inst:?}: classes do not partition the jobs")
            });
            for (p, class) in classes.iter().enumerate() {
                for &j in class {
                    let o = from_u64(inst.response_len(j));
                    let lower = &cfg.slice_hat[p] / &alpha;
                    let ok = o <= cfg.slice_hat[p] && (p == 0 || o > lower);
                    report.check(ok, || format!("{inst:?}: job {j} misplaced in class {p}"));
                }
            }
            report.check(gba_starts(inst, &cfg).is_ok(), || format!("{inst:?}: no batching plan"));
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Formulas,
    Lemmas,
    Oracle,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "formulas" => Ok(Suite::Formulas),
            "lemmas" => Ok(Suite::Lemmas),
            "oracle" => Ok(Suite::Oracle),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite {other:?}")),
        }
    }
}

/// Runs a named group of suites with their standard sizes.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<SuiteReport> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Formulas | Suite::All) {
        out.push(formulas_suite(1000, seed));
        out.push(ceiling_suite(200));
    }
    if matches!(suite, Suite::Lemmas | Suite::All) {
        let corpus = fuzz_corpus(200, seed, 64);
        out.push(lemmas_suite(&corpus));
        out.push(class_partition_suite(&corpus));
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        out.push(oracle_suite(&exhaustive_tiny()));
    }
    if suite == Suite::All {
        let corpus = fuzz_corpus(200, seed ^ 0x5eed, 64);
        out.push(feasibility_suite(&corpus, seed));
        out.push(dominance_suite(&corpus));
    }
    out
}
