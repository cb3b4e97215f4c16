//! Sparse inverse k-visibility: wall and free-space belief from k-values
//! observed only along a robot trajectory, with any number of routers.

mod evidence;
mod mapper;
mod trajectory;

pub use evidence::{fuse, wall_probability, Estimate, MapperConfig, Subsegment, WallEvidence, WallMode};
pub use mapper::{
    refine_endpoints, run_mapper, segment_trajectory, select_focused_router, subsegment_deltas,
    MapOutcome, PoseIndex, RefinedRay, Run,
};
pub use trajectory::{Sample, Trajectory};
