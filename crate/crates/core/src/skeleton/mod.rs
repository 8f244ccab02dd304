//! Workspace medial-axis skeleton built from a grid distance transform, with
//! clearance annotations on vertices and edges.

mod graph;
mod grid;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Environment, Point2, RobotModel};
use crate::ids::{SkelEdgeId, VertexId};

/// Feature-separation threshold (squared, in cells) for medial anchors.
const ANCHOR_GAMMA: i64 = 2;
/// Leaf branches shorter than this many cells are always dropped.
const MIN_SPUR_CELLS: f64 = 4.0;
/// Maximum gap between consecutive edge intermediates, in cells.
const INTERMEDIATE_SPACING_CELLS: f64 = 2.0;

#[derive(Debug, Error)]
pub enum SkeletonError {
    #[error("environment has no free grid cell at this resolution")]
    EmptyFreeSpace,
    #[error("grid resolution {0} must be positive and at most 1/50 of the smaller boundary side")]
    InvalidResolution(f64),
    #[error("skeleton edge {edge} references missing vertex {vertex}")]
    DanglingEdge { edge: usize, vertex: usize },
    #[error("skeleton ids must be 0..n in order")]
    NonContiguousIds,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonVertex {
    pub id: VertexId,
    #[serde(rename = "pos")]
    pub position: Point2,
    #[serde(rename = "clearance")]
    pub annotation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonEdge {
    pub id: SkelEdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
    /// Points from `u` to `v`, endpoints included.
    pub intermediates: Vec<Point2>,
}

impl SkeletonEdge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if v == self.u {
            self.v
        } else {
            self.u
        }
    }

    /// Intermediates ordered starting from `from`.
    pub fn points_from(&self, from: VertexId) -> Vec<Point2> {
        let mut pts = self.intermediates.clone();
        if from != self.u {
            pts.reverse();
        }
        pts
    }

    pub fn length(&self) -> f64 {
        self.intermediates.windows(2).map(|w| w[0].distance(w[1])).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct SkeletonFile {
    vertices: Vec<SkeletonVertex>,
    edges: Vec<SkeletonEdge>,
}

/// Undirected simple graph over the free workspace. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SkeletonFile", into = "SkeletonFile")]
pub struct AnnotatedSkeleton {
    vertices: Vec<SkeletonVertex>,
    edges: Vec<SkeletonEdge>,
    adjacency: Vec<Vec<(SkelEdgeId, VertexId)>>,
}

impl TryFrom<SkeletonFile> for AnnotatedSkeleton {
    type Error = SkeletonError;
    fn try_from(f: SkeletonFile) -> Result<Self, SkeletonError> {
        AnnotatedSkeleton::from_parts(f.vertices, f.edges)
    }
}

impl From<AnnotatedSkeleton> for SkeletonFile {
    fn from(s: AnnotatedSkeleton) -> Self {
        SkeletonFile {
            vertices: s.vertices,
            edges: s.edges,
        }
    }
}

impl AnnotatedSkeleton {
    pub fn from_parts(vertices: Vec<SkeletonVertex>, edges: Vec<SkeletonEdge>) -> Result<Self, SkeletonError> {
        if vertices.iter().enumerate().any(|(i, v)| v.id.0 != i) || edges.iter().enumerate().any(|(i, e)| e.id.0 != i) {
            return Err(SkeletonError::NonContiguousIds);
        }
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for e in &edges {
            for end in [e.u, e.v] {
                if end.0 >= vertices.len() {
                    return Err(SkeletonError::DanglingEdge {
                        edge: e.id.0,
                        vertex: end.0,
                    });
                }
            }
            adjacency[e.u.0].push((e.id, e.v));
            if e.u != e.v {
                adjacency[e.v.0].push((e.id, e.u));
            }
        }
        Ok(Self {
            vertices,
            edges,
            adjacency,
        })
    }

    pub fn vertices(&self) -> &[SkeletonVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[SkeletonEdge] {
        &self.edges
    }

    pub fn vertex(&self, id: VertexId) -> &SkeletonVertex {
        &self.vertices[id.0]
    }

    pub fn edge(&self, id: SkelEdgeId) -> &SkeletonEdge {
        &self.edges[id.0]
    }

    /// `(edge, neighbour)` pairs incident to `v`.
    pub fn neighbors(&self, v: VertexId) -> &[(SkelEdgeId, VertexId)] {
        &self.adjacency[v.0]
    }

    /// Connected-component label per vertex, and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.vertices.len()];
        let mut count = 0;
        for s in 0..self.vertices.len() {
            if label[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            label[s] = count;
            while let Some(v) = stack.pop() {
                for &(_, w) in &self.adjacency[v] {
                    if label[w.0] == usize::MAX {
                        label[w.0] = count;
                        stack.push(w.0);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Vertex closest to `p` (lowest id on ties).
    pub fn nearest_vertex(&self, p: Point2) -> Option<VertexId> {
        self.vertices
            .iter()
            .min_by(|a, b| a.position.distance(p).total_cmp(&b.position.distance(p)))
            .map(|v| v.id)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("skeleton serialises")
    }

    pub fn from_json_str(s: &str) -> Result<Self, SkeletonError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SkeletonError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SkeletonError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// 1/200 of the smaller boundary side.
pub fn default_grid_resolution(env: &Environment) -> f64 {
    let b = env.boundary();
    b.width().min(b.height()) / 200.0
}

/// Medial-axis skeleton of the free workspace. Annotations are left at zero;
/// see [`annotate_skeleton`].
pub fn build_workspace_skeleton(env: &Environment, grid_resolution: f64) -> Result<AnnotatedSkeleton, SkeletonError> {
    let b = env.boundary();
    let side = b.width().min(b.height());
    if grid_resolution.is_nan() || grid_resolution <= 0.0 || grid_resolution > side / 50.0 + 1e-12 {
        return Err(SkeletonError::InvalidResolution(grid_resolution));
    }
    let raster = grid::Grid::rasterize(env, grid_resolution);
    if !raster.free.iter().any(|&f| f) {
        return Err(SkeletonError::EmptyFreeSpace);
    }
    let ft = grid::feature_transform(&raster);
    let anchors = grid::medial_anchors(&raster, &ft, ANCHOR_GAMMA);
    let thin = grid::thin(&raster, &ft, &anchors);
    let mut cells = graph::extract(&raster, &ft, &thin);
    graph::simplify(&raster, &ft, &mut cells, MIN_SPUR_CELLS * grid_resolution);

    let mut remap = BTreeMap::new();
    let mut vertices = Vec::new();
    for (old, cell) in cells.vertices.iter().enumerate() {
        if let Some(cell) = cell {
            remap.insert(old, VertexId(vertices.len()));
            vertices.push(SkeletonVertex {
                id: VertexId(vertices.len()),
                position: raster.center_of(*cell),
                annotation: 0.0,
            });
        }
    }
    let spacing = INTERMEDIATE_SPACING_CELLS * grid_resolution;
    let mut edges = Vec::new();
    for e in cells.edges.iter().flatten() {
        let pts: Vec<Point2> = e.cells.iter().map(|&c| raster.center_of(c)).collect();
        edges.push(SkeletonEdge {
            id: SkelEdgeId(edges.len()),
            u: remap[&e.u],
            v: remap[&e.v],
            weight: 0.0,
            intermediates: graph::resample(&pts, spacing, |a, b| a.distance(b)),
        });
    }
    AnnotatedSkeleton::from_parts(vertices, edges)
}

/// Computes annotation values for skeleton features. The clearance policy is
/// the default; other annotations plug in here.
pub trait AnnotationPolicy {
    fn vertex_value(&self, env: &Environment, p: Point2) -> f64;
    fn edge_value(&self, env: &Environment, intermediates: &[Point2]) -> f64;
}

/// Vertex: clearance at the position. Edge: lowest clearance along it.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClearancePolicy;

impl AnnotationPolicy for ClearancePolicy {
    fn vertex_value(&self, env: &Environment, p: Point2) -> f64 {
        env.clearance(p)
    }

    fn edge_value(&self, env: &Environment, intermediates: &[Point2]) -> f64 {
        intermediates
            .iter()
            .map(|&p| env.clearance(p))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn annotate_skeleton(sk: AnnotatedSkeleton, env: &Environment) -> AnnotatedSkeleton {
    annotate_with(sk, env, &ClearancePolicy)
}

pub fn annotate_with(mut sk: AnnotatedSkeleton, env: &Environment, policy: &dyn AnnotationPolicy) -> AnnotatedSkeleton {
    for v in &mut sk.vertices {
        v.annotation = policy.vertex_value(env, v.position);
    }
    for e in &mut sk.edges {
        e.weight = policy.edge_value(env, &e.intermediates);
    }
    sk
}

/// Build and annotate in one step.
pub fn build_annotated(env: &Environment, grid_resolution: f64) -> Result<AnnotatedSkeleton, SkeletonError> {
    Ok(annotate_skeleton(build_workspace_skeleton(env, grid_resolution)?, env))
}

/// Accepts annotations at or above a clearance threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceCriteria {
    pub bounding_radius: f64,
    pub safety_factor: f64,
}

impl AcceptanceCriteria {
    pub fn new(bounding_radius: f64, safety_factor: f64) -> Self {
        Self {
            bounding_radius,
            safety_factor,
        }
    }

    pub fn for_robot(robot: &RobotModel, safety_factor: f64) -> Self {
        Self::new(robot.bounding_radius(), safety_factor)
    }

    /// Threshold of zero: every annotation passes.
    pub fn accept_all() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn threshold(&self) -> f64 {
        self.bounding_radius * self.safety_factor
    }

    pub fn accepts(&self, value: f64) -> bool {
        value >= self.threshold()
    }
}
