//! Experiment runner for the `spformat` model: sweeps workloads, formats and
//! partition sizes, writes reports and scores formats per workload group.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod summary;

pub use config::{ExperimentConfig, OutputFormat, OutputSpec};
pub use error::{BenchError, Result};
pub use report::{emit_report, read_json_reports};
pub use run::{run_experiment, run_experiment_with, RunReport};
pub use summary::{normalize_summary, SummaryTable};
