use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use kvsched::analysis::{phase_diagnostics, BoundReport};
use kvsched::export::{
    read_instance_csv, read_kills_csv, read_timeline_csv, write_completions_csv,
    write_instance_csv, write_kills_csv, write_memory_csv, write_timeline_csv,
};
use kvsched::rational::{self, to_f64, Rational};
use kvsched::schedulers::run_policy_with;
use kvsched::verify::{run_suite, Suite};
use kvsched::{Instance, PolicyKind, PolicyParams, RunMetrics, SimOptions};

use crate::render::render_svg;
use crate::source::{parse_policy, Generator, InstanceArgs, PolicyArgs};

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub inst: InstanceArgs,
    #[command(flatten)]
    pub policy_args: PolicyArgs,
    /// sps, gba, gsa, sims, mc-sf, a-min, vllm, gba-d or gsa-spec.
    #[arg(long, value_parser = parse_policy)]
    pub policy: PolicyKind,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write profile.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub inst: InstanceArgs,
    #[command(flatten)]
    pub policy_args: PolicyArgs,
    /// Comma-separated policy names.
    #[arg(long, value_delimiter = ',', value_parser = parse_policy, required = true)]
    pub policies: Vec<PolicyKind>,
    /// Job counts: a comma list or `start:end:step`.
    #[arg(long)]
    pub ns: Option<String>,
    /// Budgets: a comma list or `start:end:step`.
    #[arg(long = "Ms")]
    pub budgets: Option<String>,
    /// Comma-separated scaling factors.
    #[arg(long)]
    pub alphas: Option<String>,
    /// Comma-separated base-slice overrides.
    #[arg(long)]
    pub betas: Option<String>,
    /// Runs per point for seed-dependent configurations.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// formulas, lemmas, oracle or all.
    #[arg(value_parser = clap::value_parser!(String))]
    pub suite: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub timeline: PathBuf,
    #[arg(long)]
    pub instance: PathBuf,
    /// Kill events; without them restarts are inferred from the memory column.
    #[arg(long)]
    pub kills: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "")]
    pub title: String,
}

pub const SUMMARY_HEADER: [&str; 18] = [
    "policy",
    "n",
    "s",
    "M",
    "alpha",
    "beta",
    "seed",
    "total_flow_time",
    "mean_flow_time",
    "kill_count",
    "peak_memory",
    "makespan",
    "k_min",
    "opt_lb",
    "gba_ub",
    "gsa_ub",
    "gamma_gba",
    "gamma_gsa",
];

fn summary_row(
    params: &PolicyParams,
    inst: &Instance,
    metrics: &RunMetrics,
    report: &BoundReport,
) -> Vec<String> {
    vec![
        params.kind.to_string(),
        inst.n().to_string(),
        inst.prompt_len.to_string(),
        inst.memory_budget.to_string(),
        rational::format(&params.alpha),
        rational::format(&report.beta),
        params.seed.to_string(),
        metrics.total_flow_time.to_string(),
        format!("{:.6}", metrics.mean_flow_time),
        metrics.kill_count.to_string(),
        metrics.peak_memory.to_string(),
        metrics.makespan.to_string(),
        report.k_min.to_string(),
        format!("{:.6}", to_f64(&report.opt_lb)),
        report.gba_ub.to_string(),
        report.gsa_ub.to_string(),
        rational::format(&report.gamma_gba),
        rational::format(&report.gamma_gsa),
    ]
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("Io: cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let inst = args.inst.build()?;
    let params = args.policy_args.params(args.policy)?;
    let opts = SimOptions {
        horizon: args.policy_args.horizon,
    };
    let tl = run_policy_with(&inst, &params, &opts)?;
    let metrics = RunMetrics::from_timeline(&tl, &inst)?;
    let report = phase_diagnostics(&inst, &params.alpha, params.beta.as_ref())?.report;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("Io: cannot create {}", args.out.display()))?;
    let dir = &args.out;
    write_completions_csv(&tl, &inst, create(&dir.join("completions.csv"))?)?;
    write_memory_csv(&tl, &inst, create(&dir.join("memory.csv"))?)?;
    write_timeline_csv(&tl, &inst, create(&dir.join("timeline.csv"))?)?;
    write_kills_csv(&tl, create(&dir.join("kills.csv"))?)?;
    write_instance_csv(&inst, create(&dir.join("instance.csv"))?)?;

    let row = summary_row(&params, &inst, &metrics, &report);
    let mut summary = csv_writer(create(&dir.join("summary.csv"))?);
    summary.write_record(SUMMARY_HEADER)?;
    summary.write_record(&row)?;
    summary.flush()?;

    let mut stdout = csv_writer(io::stdout().lock());
    stdout.write_record(SUMMARY_HEADER)?;
    stdout.write_record(&row)?;
    stdout.flush()?;

    if args.svg {
        let title = format!("{} flow {}", params.kind, metrics.total_flow_time);
        fs::write(dir.join("profile.svg"), render_svg(&tl, &inst, &title))
            .context("Io: cannot write profile.svg")?;
    }
    Ok(())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// `a,b,c` or `start:end:step` (inclusive).
pub fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    let bad = || format!("InvalidSweep: cannot read {text:?} as a list or start:end:step");
    if let Some((start, rest)) = text.split_once(':') {
        let (end, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let start: u64 = start.trim().parse().with_context(bad)?;
        let end: u64 = end.trim().parse().with_context(bad)?;
        let step: u64 = step.trim().parse().with_context(bad)?;
        if step == 0 || end < start {
            bail!(bad());
        }
        return Ok((start..=end).step_by(step as usize).collect());
    }
    text.split(',')
        .map(|v| v.trim().parse::<u64>().with_context(bad))
        .collect()
}

fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    text.split(',')
        .map(|v| rational::parse(v).map_err(Into::into))
        .collect()
}

#[derive(Debug, Clone)]
struct Point {
    n: Option<u64>,
    budget: Option<u64>,
    alpha: Rational,
    beta: Option<Rational>,
}

pub const SWEEP_HEADER: [&str; 14] = [
    "n",
    "s",
    "M",
    "alpha",
    "beta",
    "policy",
    "runs",
    "mean_total_flow",
    "std_total_flow",
    "mean_flow_time",
    "std_flow_time",
    "mean_kills",
    "max_peak_memory",
    "max_makespan",
];

/// Mean and sample standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    if args.seeds == 0 {
        bail!("InvalidSweep: --seeds must be at least 1");
    }
    let ns: Vec<Option<u64>> = match &args.ns {
        Some(t) => {
            if args.inst.generator == Generator::TwoPoint {
                bail!("InvalidSweep: --ns does not apply to two-point instances");
            }
            parse_u64_list(t)?.into_iter().map(Some).collect()
        }
        None => vec![args.inst.n.map(|n| n as u64)],
    };
    let budgets: Vec<Option<u64>> = match &args.budgets {
        Some(t) => parse_u64_list(t)?.into_iter().map(Some).collect(),
        None => vec![args.inst.budget],
    };
    let alphas = match &args.alphas {
        Some(t) => parse_rational_list(t)?,
        None => vec![args.policy_args.alpha()?],
    };
    let betas: Vec<Option<Rational>> = match &args.betas {
        Some(t) => parse_rational_list(t)?.into_iter().map(Some).collect(),
        None => vec![args.policy_args.beta()?],
    };
    let mut points = Vec::new();
    for &n in &ns {
        for &budget in &budgets {
            for alpha in &alphas {
                for beta in &betas {
                    points.push(Point {
                        n,
                        budget,
                        alpha: alpha.clone(),
                        beta: beta.clone(),
                    });
                }
            }
        }
    }
    let tasks: Vec<(Point, PolicyKind)> = points
        .iter()
        .flat_map(|p| args.policies.iter().map(move |&k| (p.clone(), k)))
        .collect();

    // Rayon's indexed collect keeps rows in task order.
    let rows: Vec<Vec<String>> = tasks
        .par_iter()
        .map(|(point, kind)| sweep_point(args, point, *kind))
        .collect::<Result<_>>()?;

    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = csv_writer(sink);
    out.write_record(SWEEP_HEADER)?;
    for row in rows {
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

fn sweep_point(args: &SweepArgs, point: &Point, kind: PolicyKind) -> Result<Vec<String>> {
    let mut inst_args = args.inst.clone();
    inst_args.n = point.n.map(|n| n as usize).or(inst_args.n);
    inst_args.budget = point.budget.or(inst_args.budget);
    let seeded = kind.is_randomized() || inst_args.shuffle.is_some();
    let runs = if seeded { args.seeds } else { 1 };
    let base_shuffle = inst_args.shuffle;
    let opts = SimOptions {
        horizon: args.policy_args.horizon,
    };

    let mut flows = Vec::new();
    let mut means = Vec::new();
    let mut kills = Vec::new();
    let (mut peak, mut makespan) = (0, 0);
    let mut shape = None;
    for i in 0..runs {
        inst_args.shuffle = base_shuffle.map(|s| s.wrapping_add(i));
        let inst = inst_args.build()?;
        let params = PolicyParams::new(kind)
            .with_alpha(point.alpha.clone())
            .with_beta(point.beta.clone())
            .with_seed(args.policy_args.seed.wrapping_add(i))
            .with_pipeline(args.policy_args.k, args.policy_args.tau);
        let tl = run_policy_with(&inst, &params, &opts)?;
        let m = RunMetrics::from_timeline(&tl, &inst)?;
        flows.push(m.total_flow_time as f64);
        means.push(m.mean_flow_time);
        kills.push(m.kill_count as f64);
        peak = peak.max(m.peak_memory);
        makespan = makespan.max(m.makespan);
        shape = Some((inst.n(), inst.prompt_len, inst.memory_budget));
    }
    let (n, s, budget) = shape.expect("at least one run");
    let (flow_mean, flow_std) = mean_std(&flows);
    let (mft_mean, mft_std) = mean_std(&means);
    Ok(vec![
        n.to_string(),
        s.to_string(),
        budget.to_string(),
        rational::format(&point.alpha),
        point.beta.as_ref().map_or_else(String::new, rational::format),
        kind.to_string(),
        runs.to_string(),
        format!("{flow_mean:.3}"),
        format!("{flow_std:.3}"),
        format!("{mft_mean:.6}"),
        format!("{mft_std:.6}"),
        format!("{:.3}", mean_std(&kills).0),
        peak.to_string(),
        makespan.to_string(),
    ])
}

/// Returns whether every suite passed.
pub fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let suite: Suite = args
        .suite
        .parse()
        .map_err(|e: String| anyhow::anyhow!("UnknownSuite: {e}"))?;
    let reports = run_suite(suite, args.seed);
    let mut ok = true;
    for r in &reports {
        println!("{} {}", if r.passed() { "PASS" } else { "FAIL" }, r.summary());
        for f in r.failures.iter().take(5) {
            println!("  {f}");
        }
        ok &= r.passed();
    }
    Ok(ok)
}

pub fn cmd_render(args: &RenderArgs) -> Result<()> {
    let open = |p: &Path| File::open(p).with_context(|| format!("Io: cannot open {}", p.display()));
    let inst = read_instance_csv(open(&args.instance)?)?;
    let kills = args
        .kills
        .as_deref()
        .map(|p| open(p).map(read_kills_csv))
        .transpose()?
        .transpose()?;
    let tl = read_timeline_csv(open(&args.timeline)?, &inst, kills.as_deref())?;
    fs::write(&args.out, render_svg(&tl, &inst, &args.title))
        .with_context(|| format!("Io: cannot write {}", args.out.display()))?;
    Ok(())
}
