use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::bench::{BenchmarkReport, RunRecord, Summary};
use super::config::Arm;
use crate::error::{Error, Result};
use crate::moea::GenerationLog;

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TABLE_FILE: &str = "table.txt";
pub const LOGS_FILE: &str = "logs.jsonl";

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub table: PathBuf,
    pub logs: PathBuf,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    arm: Arm,
    problem: &'a str,
    d: usize,
    m: usize,
    seed_index: usize,
    seed: u64,
    igd: Option<f64>,
    evaluations: usize,
    wall_seconds: f64,
    error: Option<&'a str>,
    /// One-based line of this run's log in the logs file.
    log_line: usize,
}

#[derive(Serialize)]
struct LogLine<'a> {
    arm: Arm,
    problem: &'a str,
    d: usize,
    m: usize,
    seed_index: usize,
    log: &'a [GenerationLog],
}

/// Three significant digits in `6.55e-01` style; NaN for missing values.
pub fn format_sci3(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => {
            let s = format!("{v:.2e}");
            let (mantissa, exp) = s.split_once('e').expect("exponent");
            let exp: i32 = exp.parse().expect("integer exponent");
            let sign = if exp < 0 { '-' } else { '+' };
            format!("{mantissa}e{sign}{:02}", exp.abs())
        }
        Some(v) => v.to_string(),
        None => "NaN".into(),
    }
}

/// Plain-text comparison table: one row per problem, one column per arm,
/// a mark after each non-reference median, then the ROC column and a
/// closing row of `+/-/=` counts.
pub fn render_table(summary: &Summary) -> String {
    let mut header = vec!["Problem".to_string(), "m".into(), "d".into()];
    header.extend(summary.arms.iter().map(|a| a.to_string()));
    header.push("ROC(%)".into());
    let mut rows = vec![header];
    for p in &summary.problems {
        let mut row = vec![p.problem.to_ascii_uppercase(), p.m.to_string(), p.d.to_string()];
        for a in &p.arms {
            let mut cell = format_sci3(a.median);
            if let Some(mark) = a.mark {
                write!(cell, " ({mark})").unwrap();
            }
            row.push(cell);
        }
        row.push(p.roc_percent.map_or("-".into(), |r| format!("{r:.2}")));
        rows.push(row);
    }
    let mut tally = vec!["+/-/=".to_string(), String::new(), String::new()];
    for a in &summary.arms {
        tally.push(match summary.tallies.iter().find(|t| t.arm == *a) {
            Some(t) => format!("{}/{}/{}", t.better, t.worse, t.indifferent),
            None => "-".into(),
        });
    }
    tally.push(String::new());
    rows.push(tally);

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
    }
    out
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Data(format!("csv: {other:?}")),
    }
}

/// Writes one CSV row per record into `writer`, in record order.
pub fn write_records_csv<W: std::io::Write>(records: &[RunRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (i, r) in records.iter().enumerate() {
        w.serialize(CsvRow {
            arm: r.arm,
            problem: &r.problem,
            d: r.d,
            m: r.m,
            seed_index: r.seed_index,
            seed: r.seed,
            igd: r.igd,
            evaluations: r.evaluations,
            wall_seconds: r.wall_seconds,
            error: r.error.as_deref(),
            log_line: i + 1,
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the records CSV, the JSON summary, the text table and the
/// per-run logs into `dir`, creating it if needed.
pub fn emit_report(report: &BenchmarkReport, dir: &Path) -> Result<ReportFiles> {
    if report.records.is_empty() {
        return Err(Error::Contract("cannot report an empty benchmark".into()));
    }
    fs::create_dir_all(dir)?;
    let files = ReportFiles {
        records: dir.join(RECORDS_FILE),
        summary: dir.join(SUMMARY_FILE),
        table: dir.join(TABLE_FILE),
        logs: dir.join(LOGS_FILE),
    };
    write_records_csv(&report.records, fs::File::create(&files.records)?)?;
    fs::write(&files.summary, serde_json::to_string_pretty(&report.summary)?)?;
    fs::write(&files.table, render_table(&report.summary))?;
    let mut logs = std::io::BufWriter::new(fs::File::create(&files.logs)?);
    for r in &report.records {
        let line = LogLine {
            arm: r.arm,
            problem: &r.problem,
            d: r.d,
            m: r.m,
            seed_index: r.seed_index,
            log: &r.log,
        };
        serde_json::to_writer(&mut logs, &line)?;
        logs.write_all(b"\n")?;
    }
    logs.flush()?;
    Ok(files)
}
