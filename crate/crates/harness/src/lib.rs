//! Benchmark harness: task battery, sampling, model queries, answer
//! extraction, scoring and paper-style reports.

pub mod client;
pub mod dataset;
pub mod extract;
pub mod mock;
pub mod report;
pub mod run;
pub mod score;
pub mod synthetic;
pub mod task;

pub use client::{ModelClient, ModelEndpointConfig, QueryError, ResponseCache};
pub use report::{render_report, BenchReport, ReportFormat};
pub use run::{run_benchmark, score_inputs, verify_report, write_run_dir, RunOutput};
pub use score::{EvalRecord, ScoreInput, TaskResult};
pub use task::{BenchmarkTask, ReagentKind, TaskKind};
