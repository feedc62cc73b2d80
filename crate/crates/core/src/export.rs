//! CSV readers and writers. All writers emit a header row and LF endings.

use std::io::{Read, Write};

use thiserror::Error;

use crate::analysis::BoundReport;
use crate::model::{Instance, JobId, ModelError};
use crate::rational::format as fmt_rational;
use crate::timeline::{memory_profile, ActiveJob, KillEvent, Timeline};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("Csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("MalformedInput({line}): {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("AmbiguousRestart({round}): memory column disagrees with inferred progress; supply the kills file")]
    AmbiguousRestart { round: u64 },
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn join_ids(ids: impl Iterator<Item = JobId>) -> String {
    ids.map(|j| j.to_string()).collect::<Vec<_>>().join(";")
}

/// `t,active_ids,mem_used`, ids `;`-separated.
pub fn write_timeline_csv<W: Write>(tl: &Timeline, inst: &Instance, w: W) -> Result<(), ExportError> {
    let mut out = writer(w);
    out.write_record(["t", "active_ids", "mem_used"])?;
    for (t, (round, mem)) in tl.rounds.iter().zip(memory_profile(tl, inst)).enumerate() {
        out.write_record([
            t.to_string(),
            join_ids(round.iter().map(|a| a.id)),
            mem.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `job_id,response_len,completion_round`; empty when unfinished.
pub fn write_completions_csv<W: Write>(tl: &Timeline, inst: &Instance, w: W) -> Result<(), ExportError> {
    let mut out = writer(w);
    out.write_record(["job_id", "response_len", "completion_round"])?;
    for job in &inst.jobs {
        let c = tl.completions.get(job.id).copied().flatten();
        out.write_record([
            job.id.to_string(),
            job.response_len.to_string(),
            c.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_kills_csv<W: Write>(tl: &Timeline, w: W) -> Result<(), ExportError> {
    let mut out = writer(w);
    out.write_record(["round", "job_id"])?;
    for k in &tl.kills {
        out.write_record([k.round.to_string(), k.job.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_memory_csv<W: Write>(tl: &Timeline, inst: &Instance, w: W) -> Result<(), ExportError> {
    let mut out = writer(w);
    out.write_record(["t", "mem_used"])?;
    for (t, m) in memory_profile(tl, inst).into_iter().enumerate() {
        out.write_record([t.to_string(), m.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `# prompt_len=` and `# memory_budget=` lines, then `job_id,response_len`.
pub fn write_instance_csv<W: Write>(inst: &Instance, mut w: W) -> Result<(), ExportError> {
    writeln!(w, "# prompt_len={}", inst.prompt_len)?;
    writeln!(w, "# memory_budget={}", inst.memory_budget)?;
    let mut out = writer(w);
    out.write_record(["job_id", "response_len"])?;
    for job in &inst.jobs {
        out.write_record([job.id.to_string(), job.response_len.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub const BOUND_REPORT_HEADER: [&str; 11] = [
    "instance_id",
    "alpha",
    "beta",
    "k_min",
    "opt_lb",
    "gba_flow",
    "gba_ub",
    "gsa_flow",
    "gsa_ub",
    "gamma_gba",
    "gamma_gsa",
];

/// Rationals are written as `p/q`, except `opt_lb`, which is a decimal
/// rounded to six places.
pub fn bound_report_row(id: &str, report: &BoundReport, gba_flow: u64, gsa_flow: u64) -> Vec<String> {
    vec![
        id.to_string(),
        fmt_rational(&report.alpha),
        fmt_rational(&report.beta),
        report.k_min.to_string(),
        format!("{:.6}", crate::rational::to_f64(&report.opt_lb)),
        gba_flow.to_string(),
        report.gba_ub.to_string(),
        gsa_flow.to_string(),
        report.gsa_ub.to_string(),
        fmt_rational(&report.gamma_gba),
        fmt_rational(&report.gamma_gsa),
    ]
}

pub fn write_bound_reports<W: Write>(
    rows: &[(String, BoundReport, u64, u64)],
    w: W,
) -> Result<(), ExportError> {
    let mut out = writer(w);
    out.write_record(BOUND_REPORT_HEADER)?;
    for (id, report, gba, gsa) in rows {
        out.write_record(bound_report_row(id, report, *gba, *gsa))?;
    }
    out.flush()?;
    Ok(())
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn malformed(line: usize, message: impl Into<String>) -> ExportError {
    ExportError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(field: &str, line: usize) -> Result<T, ExportError> {
    field
        .trim()
        .parse()
        .map_err(|_| malformed(line, format!("bad number {field:?}")))
}

pub fn read_instance_csv<R: Read>(mut r: R) -> Result<Instance, ExportError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let (mut s, mut m) = (None, None);
    let mut lengths = Vec::new();
    let mut header_seen = false;
    for (line, l) in data_lines(&text) {
        if let Some(c) = l.strip_prefix('#') {
            if let Some((k, v)) = c.trim().split_once('=') {
                match k.trim() {
                    "prompt_len" => s = Some(parse_num::<u64>(v, line)?),
                    "memory_budget" => m = Some(parse_num::<u64>(v, line)?),
                    _ => {}
                }
            }
            continue;
        }
        if !header_seen {
            header_seen = true;
            if l.replace(' ', "") != "job_id,response_len" {
                return Err(malformed(line, "expected header job_id,response_len"));
            }
            continue;
        }
        let (id, o) = l
            .split_once(',')
            .ok_or_else(|| malformed(line, "expected job_id,response_len"))?;
        let id: usize = parse_num(id, line)?;
        if id != lengths.len() {
            return Err(malformed(line, format!("job ids must run 0..n, got {id}")));
        }
        lengths.push(parse_num::<u64>(o, line)?);
    }
    let s = s.ok_or_else(|| malformed(0, "missing # prompt_len="))?;
    let m = m.ok_or_else(|| malformed(0, "missing # memory_budget="))?;
    Ok(Instance::new(s, m, &lengths)?)
}

pub fn read_kills_csv<R: Read>(mut r: R) -> Result<Vec<KillEvent>, ExportError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut out = Vec::new();
    for (line, l) in data_lines(&text).skip(1) {
        let (round, job) = l
            .split_once(',')
            .ok_or_else(|| malformed(line, "expected round,job_id"))?;
        out.push(KillEvent {
            round: parse_num(round, line)?,
            job: parse_num(job, line)?,
        });
    }
    Ok(out)
}

/// Rebuilds a timeline from its CSV form. Progress is replayed from the
/// active lists; without `kills`, a job that stays in the batch is assumed
/// to continue, and a mismatch with the memory column is reported.
pub fn read_timeline_csv<R: Read>(
    mut r: R,
    inst: &Instance,
    kills: Option<&[KillEvent]>,
) -> Result<Timeline, ExportError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let n = inst.n();
    let mut tl = Timeline::with_jobs(n);
    let mut progress = vec![0u64; n];
    let mut previous = vec![false; n];
    let mut lines = data_lines(&text);
    match lines.next() {
        Some((_, h)) if h.replace(' ', "") == "t,active_ids,mem_used" => {}
        Some((line, _)) => return Err(malformed(line, "expected header t,active_ids,mem_used")),
        None => return Ok(tl),
    }
    for (line, l) in lines {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 3 {
            return Err(malformed(line, "expected three fields"));
        }
        let t: u64 = parse_num(fields[0], line)?;
        if t != tl.rounds.len() as u64 {
            return Err(malformed(line, format!("rounds must be consecutive, got {t}")));
        }
        let mem: u64 = parse_num(fields[2], line)?;
        let ids: Vec<JobId> = if fields[1].trim().is_empty() {
            Vec::new()
        } else {
            fields[1]
                .split(';')
                .map(|f| parse_num(f, line))
                .collect::<Result<_, _>>()?
        };
        let mut current = vec![false; n];
        for &id in &ids {
            if id >= n {
                return Err(malformed(line, format!("unknown job {id}")));
            }
            current[id] = true;
        }
        let killed_now: Vec<JobId> = match kills {
            Some(k) => k.iter().filter(|e| e.round == t).map(|e| e.job).collect(),
            None => (0..n).filter(|&j| previous[j] && !current[j]).collect(),
        };
        for &j in &killed_now {
            progress[j] = 0;
            tl.kills.push(KillEvent { round: t, job: j });
        }
        let mut record = Vec::with_capacity(ids.len());
        let mut used = 0;
        for &id in &ids {
            let u = if previous[id] && !killed_now.contains(&id) {
                progress[id]
            } else {
                0
            };
            used += inst.prompt_len + u + 1;
            record.push(ActiveJob { id, progress: u });
        }
        if used != mem {
            return Err(ExportError::AmbiguousRestart { round: t });
        }
        previous = vec![false; n];
        for a in &record {
            progress[a.id] = a.progress + 1;
            if progress[a.id] >= inst.response_len(a.id) {
                tl.completions[a.id] = Some(t + 1);
            } else {
                previous[a.id] = true;
            }
        }
        tl.rounds.push(record);
    }
    Ok(tl)
}
