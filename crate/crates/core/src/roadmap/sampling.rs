use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Environment, Point2, ValidityMode};
use crate::ids::SkelEdgeId;
use crate::skeleton::AnnotatedSkeleton;
use crate::Configuration;

/// Disc on a skeleton edge, centred at one of its intermediates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingRegion {
    pub center: Point2,
    pub radius: f64,
    pub skeleton_edge: SkelEdgeId,
    /// True when counting intermediates from the edge's `u` end.
    pub from_u: bool,
    pub intermediate_index: usize,
}

impl SamplingRegion {
    pub fn on_edge(sk: &AnnotatedSkeleton, edge: SkelEdgeId, from_u: bool, index: usize, radius: f64) -> Self {
        let pts = &sk.edge(edge).intermediates;
        let i = index.min(pts.len() - 1);
        let center = if from_u { pts[i] } else { pts[pts.len() - 1 - i] };
        Self {
            center,
            radius,
            skeleton_edge: edge,
            from_u,
            intermediate_index: i,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleArea {
    Boundary,
    Disc { center: Point2, radius: f64 },
}

impl From<&SamplingRegion> for SampleArea {
    fn from(r: &SamplingRegion) -> Self {
        SampleArea::Disc {
            center: r.center,
            radius: r.radius,
        }
    }
}

/// Running tally of sampling attempts against a hard limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub limit: usize,
    pub used: usize,
}

impl SampleBudget {
    pub fn new(limit: usize) -> Self {
        Self { limit, used: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.limit.saturating_sub(self.used)
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.limit
    }

    /// Reserve up to `n` attempts; returns how many were granted.
    pub fn take(&mut self, n: usize) -> usize {
        let granted = n.min(self.remaining());
        self.used += granted;
        granted
    }

    pub fn extend(&mut self, extra: usize) {
        self.limit += extra;
    }
}

fn random_position<R: Rng + ?Sized>(env: &Environment, rng: &mut R, area: SampleArea) -> Point2 {
    let b = env.boundary();
    match area {
        SampleArea::Boundary => Point2::new(rng.gen_range(b.min.x..b.max.x), rng.gen_range(b.min.y..b.max.y)),
        SampleArea::Disc { center, radius } => {
            // rejection keeps positions uniform on disc ∩ boundary
            for _ in 0..64 {
                let r = radius * rng.gen::<f64>().sqrt();
                let a = rng.gen_range(-PI..PI);
                let p = Point2::new(center.x + r * a.cos(), center.y + r * a.sin());
                if b.contains(p) {
                    return p;
                }
            }
            Point2::new(center.x.clamp(b.min.x, b.max.x), center.y.clamp(b.min.y, b.max.y))
        }
    }
}

/// A uniformly random pose in `area`, without any collision query.
pub fn random_config<R: Rng + ?Sized>(env: &Environment, rng: &mut R, area: SampleArea) -> Configuration {
    let p = random_position(env, rng, area);
    if env.robot().is_point() {
        Configuration::point(p.x, p.y)
    } else {
        Configuration::new(p.x, p.y, rng.gen_range(-PI..PI))
    }
}

/// `n_attempts` random poses in `area`, each checked once; the valid ones.
pub fn sample_in_region<R: Rng + ?Sized>(
    env: &Environment,
    rng: &mut R,
    area: SampleArea,
    n_attempts: usize,
    mode: ValidityMode,
) -> Vec<Configuration> {
    (0..n_attempts)
        .filter_map(|_| {
            let q = random_config(env, rng, area);
            env.is_valid(&q, mode).then_some(q)
        })
        .collect()
}
