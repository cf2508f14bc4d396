//! Benchmark orchestration and reporting.

mod bench;
mod config;
mod report;

pub use bench::{
    benchmark_seed, median, run_arm, run_benchmark, summarize, ArmSummary, BenchmarkReport, ProblemSummary, RunRecord,
    Summary, Tally,
};
pub use config::{Arm, ExperimentConfig};
pub use report::{
    emit_report, format_sci3, render_table, write_records_csv, ReportFiles, LOGS_FILE, RECORDS_FILE, SUMMARY_FILE,
    TABLE_FILE,
};
