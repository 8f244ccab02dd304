use serde::{Deserialize, Serialize};

use super::primitives::{point_in_ring, ring_segments, segments_intersect, signed_area, Aabb, Point2};
use super::GeometryError;

/// A simple counterclockwise polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Polygon {
    vertices: Vec<Point2>,
    aabb: Aabb,
}

impl Polygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        let area = signed_area(&vertices);
        if area <= 0.0 {
            return Err(GeometryError::NotCounterclockwise(area));
        }
        if !is_simple(&vertices) {
            return Err(GeometryError::SelfIntersecting);
        }
        let aabb = Aabb::from_points(&vertices);
        Ok(Self { vertices, aabb })
    }

    /// Axis-aligned rectangle obstacle.
    pub fn rectangle(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self, GeometryError> {
        Self::new(Aabb::new(xmin, ymin, xmax, ymax).corners().to_vec())
    }

    /// Regular `n`-gon of circumradius `radius` about `center`.
    pub fn regular(center: Point2, radius: f64, n: usize) -> Result<Self, GeometryError> {
        let pts = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                center + Point2::new(a.cos(), a.sin()) * radius
            })
            .collect();
        Self::new(pts)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn aabb(&self) -> &Aabb {
        &self.aabb
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        let mut c = Point2::default();
        let mut a2 = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = p.cross(q);
            a2 += w;
            c = c + (p + q) * w;
        }
        c * (1.0 / (3.0 * a2))
    }

    /// Closed containment (boundary counts as inside).
    pub fn contains(&self, p: Point2) -> bool {
        self.aabb.contains(p) && point_in_ring(p, &self.vertices)
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        ring_segments(&self.vertices)
    }
}

impl TryFrom<Vec<Point2>> for Polygon {
    type Error = GeometryError;
    fn try_from(v: Vec<Point2>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Polygon> for Vec<Point2> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

fn is_simple(ring: &[Point2]) -> bool {
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            // adjacent edges share an endpoint by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Robot geometry relative to its reference point.
#[derive(Clone, Debug, PartialEq)]
pub enum RobotModel {
    Point,
    Rigid { shape: Polygon, bounding_radius: f64 },
}

impl RobotModel {
    pub fn rigid(shape: Polygon) -> Self {
        let bounding_radius = shape.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
        Self::Rigid { shape, bounding_radius }
    }

    pub fn bounding_radius(&self) -> f64 {
        match self {
            Self::Point => 0.0,
            Self::Rigid { bounding_radius, .. } => *bounding_radius,
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, Self::Point)
    }

    /// Robot outline placed at pose `(x, y, theta)`; a single point for point robots.
    pub fn placed(&self, x: f64, y: f64, theta: f64) -> Vec<Point2> {
        let origin = Point2::new(x, y);
        match self {
            Self::Point => vec![origin],
            Self::Rigid { shape, .. } => shape.vertices().iter().map(|v| origin + v.rotated(theta)).collect(),
        }
    }
}
