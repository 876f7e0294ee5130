//! Resumable conjecture scan streamed as JSON lines.
//!
//! Line k of the output holds instance k, so the number of complete lines is
//! the resume point. A trailing partial line (interrupted write) is dropped.

use std::fs::OpenOptions;
use std::io::{BufWriter, Write};
use std::path::Path;

use qmix_core::regularity::{scan_instance, InstanceKind, ScanConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::report::ScanLine;

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub n: u64,
    pub config: ScanConfig,
    pub jobs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub seed: u64,
    pub total: u64,
    pub resumed_from: u64,
    pub written: u64,
    pub weak_violations: usize,
    pub strong_violations_reversible: usize,
    pub strong_violations_other: usize,
}

pub fn parse_kind(s: &str) -> Option<InstanceKind> {
    InstanceKind::ALL.into_iter().find(|k| k.name() == s)
}

/// Complete lines already in `path`, after truncating any partial tail.
pub fn existing_lines(path: &Path) -> CliResult<Vec<ScanLine>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let complete = text.rfind('\n').map_or(0, |i| i + 1);
    if complete < text.len() {
        let f = OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| CliError::io(path, e))?;
        f.set_len(complete as u64)
            .map_err(|e| CliError::io(path, e))?;
    }
    let mut lines = Vec::new();
    for (k, raw) in text[..complete].lines().enumerate() {
        let line: ScanLine = serde_json::from_str(raw).map_err(|e| CliError::Malformed {
            message: format!("existing scan output: {e}"),
            field: Some("out".to_string()),
            line: Some(k + 1),
            column: Some(e.column()),
        })?;
        if line.index != k as u64 {
            return Err(CliError::Malformed {
                message: format!(
                    "existing scan output: line {} holds index {}",
                    k + 1,
                    line.index
                ),
                field: Some("out".to_string()),
                line: Some(k + 1),
                column: None,
            });
        }
        lines.push(line);
    }
    Ok(lines)
}

/// Seed recorded in an existing scan file; a conflicting explicit seed is an error.
pub fn resume_seed(lines: &[ScanLine], requested: Option<u64>) -> CliResult<Option<u64>> {
    match (lines.first().map(|l| l.seed), requested) {
        (Some(file), Some(req)) if file != req => Err(CliError::malformed(
            format!("output already holds a scan with seed {file}, requested {req}"),
            "seed",
        )),
        (Some(file), _) => Ok(Some(file)),
        (None, req) => Ok(req),
    }
}

pub fn run_scan(
    path: &Path,
    seed: u64,
    existing: &[ScanLine],
    opts: &ScanOptions,
) -> CliResult<ScanSummary> {
    let start = existing.len() as u64;
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);

    let mut summary = ScanSummary {
        seed,
        total: opts.n,
        resumed_from: start,
        written: 0,
        weak_violations: 0,
        strong_violations_reversible: 0,
        strong_violations_other: 0,
    };
    let tally = |l: &ScanLine, s: &mut ScanSummary| {
        s.weak_violations += l.weak_violation as usize;
        if l.strong_violation {
            if l.reversible {
                s.strong_violations_reversible += 1;
            } else {
                s.strong_violations_other += 1;
            }
        }
    };
    for l in existing {
        tally(l, &mut summary);
    }

    let jobs = opts.jobs.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::malformed(e.to_string(), "jobs"))?;
    let chunk = 2 * jobs as u64;
    let mut next = start;
    while next < opts.n {
        let end = (next + chunk).min(opts.n);
        let records = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|i| scan_instance(&opts.config, seed, i))
                .collect::<Vec<_>>()
        });
        for rec in records {
            let line = ScanLine::new(seed, &rec?);
            let text = serde_json::to_string(&line).expect("scan lines serialize");
            writeln!(out, "{text}").map_err(|e| CliError::io(path, e))?;
            tally(&line, &mut summary);
            summary.written += 1;
        }
        out.flush().map_err(|e| CliError::io(path, e))?;
        next = end;
    }
    Ok(summary)
}
