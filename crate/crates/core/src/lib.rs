//! Skeleton-guided lazy roadmap planning for planar point and SE(2) robots.
//!
//! The crate is layered bottom-up:
//!
//! * [`geometry`]: polygons, environments and instrumented collision checks.
//! * [`skeleton`]: grid medial-axis skeletons annotated with clearance.
//! * [`roadmap`]: the C-space graph with tri-state edges and sampling regions.
//! * [`query`]: shortest and k-shortest path search over roadmaps.
//! * [`planners`]: the hierarchical annotated skeleton planner and the PRM
//!   baselines it is compared against.

pub mod geometry;
pub mod ids;
pub mod planners;
pub mod query;
pub mod roadmap;
pub mod skeleton;
pub mod space;

pub use space::Configuration;
