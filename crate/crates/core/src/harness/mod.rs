//! Experiment runner: configuration, sweeps, result files and golden tables.

pub mod commands;
pub mod config;
pub mod record;
pub mod reference;
pub mod run;

pub use config::{ExperimentConfig, PreconditionerConfig, Shift, Study};
pub use record::{emit_results, read_results, records_from_csv, records_from_json, records_to_csv, records_to_json, Format, RunRecord, RunStatus};
pub use reference::{compare_to_reference, load_reference, parse_reference, Comparison, ReferenceCell, RefValue, Verdict};
pub use commands::render_table;
pub use run::{problem_for, run_cell, run_table};
