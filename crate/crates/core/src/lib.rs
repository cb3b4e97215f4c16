//! Occupancy mapping from WiFi signal strength by inverse k-visibility.
//!
//! A router's signal loses a roughly fixed amount per wall it passes. Binning
//! readings into wall counts `k` along a walked trajectory lets a mapper place
//! walls between poses whose `k` differs and mark free space between poses
//! whose `k` agrees.

pub mod dense;
pub mod error;
pub mod grid;
pub mod metrics;
pub mod raycast;
pub mod rssi;
pub mod scenes;
pub mod sparse;

pub use dense::{dense_inverse, WallGrid};
pub use error::{Axis, Error, Result};
pub use grid::{
    bounding_box, world_to_cell, BeliefMap, CellIndex, CellRect, Floorplan, GridSpec, WorldPoint,
};
pub use metrics::{iou, k_accuracy, mse, EvalReport, KAccuracy, MseScore};
pub use raycast::{count_wall_crossings, k_field, traverse, KField, RayPath};
pub use rssi::{
    classify_k, fit_thresholds, simulate_rssi, sliding_filter, RssiModelParams, RssiThresholds,
};
pub use sparse::{run_mapper, MapOutcome, MapperConfig, Sample, Trajectory, WallMode};
