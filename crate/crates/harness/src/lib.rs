//! Scenario runner and CSV reports for the workbench.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{ScenarioConfig, ScenarioId};
pub use report::{emit_report, load_report, read_report, write_report, ReportRow, REPORT_HEADER};
pub use scenarios::{run_certify, run_norms, run_oscillation, run_probe, run_scenario};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
}
