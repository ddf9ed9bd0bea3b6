//! Experiment configs, the function catalog and the verification suites.

pub mod catalog;
pub mod config;
pub mod report;
pub mod suites;

pub use config::{ExperimentConfig, Suite};
pub use report::Report;
pub use suites::{execute, resolve_workers, run_suite};
