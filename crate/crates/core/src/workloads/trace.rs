//! Response-length traces: one integer per line (`#` comments allowed), or
//! CSV with a `response_len` column.

use std::path::Path;

use crate::model::Instance;

use super::WorkloadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub response_len: u64,
    /// 1-based line in the source file.
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub records: usize,
    pub accepted: usize,
    /// Records longer than `M - s`.
    pub skipped_too_long: usize,
    pub skipped_zero: usize,
    /// Valid records past the limit.
    pub unused: usize,
}

fn parse_records(text: &str) -> Result<Vec<TraceRecord>, WorkloadError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let Some((first_no, first)) = lines.next() else {
        return Ok(Vec::new());
    };
    let header: Vec<&str> = first.split(',').map(str::trim).collect();
    if let Some(col) = header.iter().position(|h| *h == "response_len") {
        // Hand the rest to the csv reader so quoting is handled properly.
        let body: String = text
            .lines()
            .enumerate()
            .skip(first_no)
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|(i, l)| format!("{},{}\n", i + 1, l))
            .collect();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(body.as_bytes());
        let mut out = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(|e| WorkloadError::ParseError {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line: usize = row[0].parse().unwrap_or(0);
            let field = row.get(col + 1).unwrap_or("").trim();
            out.push(TraceRecord {
                response_len: parse_len(field, line)?,
                line,
            });
        }
        return Ok(out);
    }
    std::iter::once((first_no, first))
        .chain(lines)
        .map(|(line, l)| {
            Ok(TraceRecord {
                response_len: parse_len(l, line)?,
                line,
            })
        })
        .collect()
}

fn parse_len(field: &str, line: usize) -> Result<u64, WorkloadError> {
    field.parse().map_err(|_| WorkloadError::ParseError {
        line,
        message: format!("expected a non-negative integer, got {field:?}"),
    })
}

/// Builds an instance from the first `limit` records that fit. Zero-length
/// and over-budget records are skipped and counted.
pub fn load_trace_from_str(
    text: &str,
    s: u64,
    budget: u64,
    limit: Option<usize>,
) -> Result<(Instance, LoadReport), WorkloadError> {
    let records = parse_records(text)?;
    let capacity = budget.saturating_sub(s);
    let mut report = LoadReport {
        records: records.len(),
        ..LoadReport::default()
    };
    let mut lengths = Vec::new();
    for r in &records {
        if r.response_len == 0 {
            report.skipped_zero += 1;
        } else if r.response_len > capacity {
            report.skipped_too_long += 1;
        } else if limit.is_some_and(|l| lengths.len() >= l) {
            report.unused += 1;
        } else {
            lengths.push(r.response_len);
        }
    }
    if lengths.is_empty() {
        return Err(WorkloadError::AllRecordsInfeasible {
            total: records.len(),
        });
    }
    report.accepted = lengths.len();
    Ok((Instance::new(s, budget, &lengths)?, report))
}

pub fn load_trace(
    path: impl AsRef<Path>,
    s: u64,
    budget: u64,
    limit: Option<usize>,
) -> Result<(Instance, LoadReport), WorkloadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => WorkloadError::FileNotFound(path.display().to_string()),
        _ => WorkloadError::Io(e),
    })?;
    load_trace_from_str(&text, s, budget, limit)
}
