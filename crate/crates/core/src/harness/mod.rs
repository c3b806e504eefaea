//! Blocklength sweeps, per-row bound verdicts and report I/O.

mod config;
mod experiment;
mod report;

pub use config::{ExperimentConfig, ModeSpec, SchemeSpec};
pub use experiment::run_experiment;
pub use report::{
    emit_report, format_float, parse_float, read_csv, read_jsonl, round12, ExperimentRecord,
    ExperimentReport, ReportFormat, ReportMetadata, Verdict, CSV_COLUMNS,
};
