//! Experiment harness: config ingestion, sweep execution, result
//! emission, and the built-in invariant suite.

pub mod config;
pub mod output;
pub mod sweep;
pub mod verify;

pub use config::{load_spec, parse_angle, parse_spec, OutputFormat, SweepSpec, ENV_SEED_VAR};
pub use output::{emit, format_float, parse_rows_csv, rows_to_csv, SweepDocument};
pub use sweep::{
    run_sweep, run_sweep_with_model, summarize, ComparisonRow, RunManifest, Summary, CSV_COLUMNS,
};
pub use verify::{run_all, CheckResult, VerifyReport};
