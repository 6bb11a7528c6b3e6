//! Experiment orchestration: metrics, chain-strength sweeps, the ALM loop,
//! scaling surveys and CSV reports.

mod alm;
mod job;
mod metrics;
mod report;
pub mod scenarios;
mod survey;
mod sweep;

pub use alm::{alm_experiment, epsilon_grid_sweep, AlmProblem, AlmRun, AlmStep, GridCell};
pub use job::{EmbeddingSpec, JobReport, ModelSource, ReductionSpec, SweepJob};
pub use metrics::{compute_metrics, Checker, MetricOptions, MetricsRow, MkpChecker, QapChecker, Sense};
pub use report::{results_csv, survey_csv, sweep_rows, ResultRow, SeedLabel, RESULTS_HEADER, SURVEY_HEADER};
pub use survey::{scaling_survey, SurveyInstance, SurveyRow};
pub use sweep::{
    cell_seed, chain_strength_sweep, select_chain_strength, CellFailure, CellRow, ChainExpandEmbedder, Embedder,
    FixedEmbedder, InnerSampler, SamplerSpec, SelectionRule, SweepConfig, SweepOutcome, SweepTarget,
};
