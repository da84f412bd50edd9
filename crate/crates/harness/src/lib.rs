//! Experiment driver for the landing-sequence learning pipeline: file
//! formats, evaluation statistics and the full train/evaluate experiment.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod io;

pub use analysis::{DistributionSummary, Evaluation, PairResult, PerMetric, TraceRow};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport};
