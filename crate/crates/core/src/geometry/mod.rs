//! Planar geometry and instrumented collision queries.
//!
//! Every validity or clearance query issued through an [`Environment`] is
//! tallied in its shared [`CollisionCounter`]; planner cost comparisons read
//! counter deltas rather than planner self-reports.

mod counter;
mod environment;
mod polygon;
mod primitives;

pub use counter::{CdSnapshot, CollisionCounter};
pub use environment::{ClearanceQuery, Environment, ValidityMode, Witness};
pub use polygon::{Polygon, RobotModel};
pub use primitives::{
    angle_difference, closest_point_on_segment, normalize_angle, orient, point_in_ring, point_segment_distance,
    segments_intersect, signed_area, winding_number, Aabb, Point2, EPSILON,
};

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon must be counterclockwise with positive area (signed area {0})")]
    NotCounterclockwise(f64),
    #[error("polygon is self-intersecting")]
    SelfIntersecting,
    #[error("boundary has no area")]
    EmptyBoundary,
    #[error("obstacle {0} extends outside the boundary")]
    ObstacleOutsideBoundary(usize),
    #[error("obstacles cover the whole boundary")]
    NoFreeSpace,
    #[error("malformed environment file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
