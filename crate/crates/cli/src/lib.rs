//! Experiment plumbing around the `kvis` mapping library: JSON configs,
//! generated trajectories and the simulate, fit, map and evaluate stages.

pub mod config;
pub mod pipeline;
pub mod trajectory;

pub use config::{ExperimentConfig, Pattern, ThresholdSource, TrajectorySource};
pub use pipeline::{load_floorplan, run_pipeline, PipelineOutput};
pub use trajectory::generate_trajectory;
