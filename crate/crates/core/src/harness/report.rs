//! Run reports: per-path records, aggregates and their console rendering.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::pipeline::{PathRecord, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    pub paths: usize,
    pub sat: usize,
    pub execution_pass: usize,
    pub path_correct: usize,
    pub unsat: usize,
    /// Unknown verdicts, timeouts included. They do not count as SAT.
    pub unknown: usize,
    pub unsupported: usize,
    pub errors: usize,
    pub mean_time_ms: f64,
}

impl Aggregates {
    pub fn from_records(records: &[PathRecord]) -> Aggregates {
        let mut a = Aggregates {
            paths: records.len(),
            ..Aggregates::default()
        };
        let mut total_ms = 0.0;
        for r in records {
            match r.status {
                SolveStatus::Sat => a.sat += 1,
                SolveStatus::Unsat => a.unsat += 1,
                SolveStatus::Unknown => a.unknown += 1,
                SolveStatus::Unsupported => a.unsupported += 1,
                SolveStatus::Error => a.errors += 1,
            }
            a.execution_pass += usize::from(r.execution_pass());
            a.path_correct += usize::from(r.path_correct());
            total_ms += r.time_ms;
        }
        if !records.is_empty() {
            a.mean_time_ms = total_ms / records.len() as f64;
        }
        a
    }

    /// Counts without timing, for comparisons between runs.
    pub fn counts(&self) -> [usize; 8] {
        [
            self.paths,
            self.sat,
            self.execution_pass,
            self.path_correct,
            self.unsat,
            self.unknown,
            self.unsupported,
            self.errors,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub bridge: String,
    pub templates_k: usize,
    /// Ordered by (file, function, path id).
    pub records: Vec<PathRecord>,
    pub aggregates: Aggregates,
    /// Programs or functions that produced no paths, with the reason.
    #[serde(default)]
    pub failures: Vec<ProgramFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramFailure {
    pub file: String,
    pub function: Option<String>,
    pub reason: String,
}

impl RunReport {
    pub fn new(bridge: String, templates_k: usize, mut records: Vec<PathRecord>, failures: Vec<ProgramFailure>) -> Self {
        records.sort_by(|a, b| (&a.file, &a.function, a.path_id).cmp(&(&b.file, &b.function, b.path_id)));
        let aggregates = Aggregates::from_records(&records);
        Self {
            bridge,
            templates_k,
            records,
            aggregates,
            failures,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<RunReport, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Whether the stored aggregates match the records, timing aside.
    pub fn consistent(&self) -> bool {
        Aggregates::from_records(&self.records).counts() == self.aggregates.counts()
    }
}

/// `n (p%)` with one decimal; an empty denominator gives `0.0%`.
pub fn cell(n: usize, total: usize) -> String {
    let pct = if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 };
    format!("{n} ({pct:.1}%)")
}

/// SAT, execution pass and path correct cells over all paths.
pub fn summary_row(a: &Aggregates) -> String {
    format!(
        "{} {} {}",
        cell(a.sat, a.paths),
        cell(a.execution_pass, a.paths),
        cell(a.path_correct, a.paths)
    )
}

pub fn render_table(r: &RunReport) -> String {
    let a = &r.aggregates;
    let mut out = String::new();
    let _ = writeln!(out, "paths: {}  bridge: {}  k: {}", a.paths, r.bridge, r.templates_k);
    let _ = writeln!(out, "SAT / Execution pass / Path correct");
    let _ = writeln!(out, "{}", summary_row(a));
    let _ = writeln!(
        out,
        "unsat {}  unknown {}  unsupported {}  errors {}",
        a.unsat, a.unknown, a.unsupported, a.errors
    );
    let _ = writeln!(out, "mean time per path: {:.1} ms", a.mean_time_ms);
    for f in &r.failures {
        let _ = writeln!(
            out,
            "skipped {}{}: {}",
            f.file,
            f.function.as_deref().map(|n| format!("::{n}")).unwrap_or_default(),
            f.reason
        );
    }
    out
}

/// One row per report, keyed by retrieval k, in ascending k.
pub fn render_grid(reports: &[RunReport]) -> String {
    let mut rows: Vec<&RunReport> = reports.iter().collect();
    rows.sort_by_key(|r| r.templates_k);
    let mut out = String::from("k\tSAT\tExecution pass\tPath correct\n");
    for r in rows {
        let a = &r.aggregates;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.templates_k,
            cell(a.sat, a.paths),
            cell(a.execution_pass, a.paths),
            cell(a.path_correct, a.paths)
        );
    }
    out
}
