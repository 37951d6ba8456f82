//! Batch runs: parameter sweeps, ratio summaries and verification suites.

pub mod grid;
mod summary;
mod sweep;
pub mod verify;

pub use grid::{eval_expr, Bindings, Grid, GridValue};
pub use summary::{summarize_ratios, RatioRange, RatioSummary};
pub use sweep::{
    predictor_for, read_csv, run_sweep, write_csv, write_json, OutputFormat, RatioRow, SweepConfig, SweepGroup, VERSION,
};
pub use verify::{run_verification, Check, VerificationReport, SUITES};
