//! Configuration loading, input tables and report output.

pub mod config;
pub mod report;
pub mod tables;

pub use config::{load_config, write_param_rows, ConfigFile, LoadedConfig, ParamRow};
pub use report::{emit_reports, report_rows, ReportRow, RunInfo, RunManifest};
