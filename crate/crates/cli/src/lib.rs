//! Collect → learn → plan → evaluate pipeline over a simulated cell, plus the
//! metrics and file formats it reports with.
//!
//! - [`config`]: the JSON pipeline config and its validation
//! - [`pipeline`]: the phases, their on-disk artifacts and [`pipeline::BenchReport`]
//! - [`metrics`]: makespan and separation CDFs
//! - [`gantt`]: planned vs measured timelines as CSV

use std::path::PathBuf;

use synplan_core::learn::LearnError;
use synplan_core::planner::PlannerError;
use synplan_core::process::ProcessError;
use synplan_core::sim::SimError;
use thiserror::Error;

pub mod config;
pub mod gantt;
pub mod metrics;
pub mod pipeline;

pub use config::{PipelineConfig, PlannerSpec, Resolved};
pub use gantt::render_gantt_csv;
pub use metrics::{metric_distance_cdf, metric_dmin_cdf, metric_makespan, MetricError};
pub use pipeline::{run_pipeline, run_pipeline_to, BenchReport};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid process: {0}")]
    Process(#[from] ProcessError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("learn phase: {0}")]
    Learn(#[from] LearnError),
    #[error("plan phase, planner `{planner}`: {source}")]
    Solver { planner: String, source: PlannerError },
    #[error("{phase} phase, run seed {seed}: {source}")]
    Simulation {
        phase: &'static str,
        seed: u64,
        source: SimError,
    },
    #[error("report phase: {0}")]
    Metric(#[from] MetricError),
}

impl PipelineError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Process(_) => 2,
            PipelineError::Solver { .. } => 3,
            PipelineError::Simulation { .. } | PipelineError::Metric(_) => 4,
            PipelineError::Io { .. } | PipelineError::Learn(_) => 1,
        }
    }
}
