//! Orchestration: configuration, the per-path pipeline, corpus benches,
//! reports and the command line.

pub mod bench;
pub mod cli;
pub mod config;
pub mod pipeline;
pub mod report;

pub use bench::{bench, load_program, parse_inputs, Program};
pub use config::{ConfigError, HarnessConfig};
pub use pipeline::{run_path, FunctionCtx, PathOutcome, PathRecord, SolveStatus, TranslationSource};
pub use report::{cell, render_grid, render_table, summary_row, Aggregates, RunReport};
