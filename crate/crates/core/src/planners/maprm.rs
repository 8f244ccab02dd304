use std::time::Instant;

use super::{Core, PlanError, Planner};
use crate::geometry::{Environment, Point2};
use crate::query::Path;
use crate::roadmap::Roadmap;
use crate::Configuration;

/// Bisection tolerance for medial-axis retraction, in workspace units.
pub const RETRACTION_TOLERANCE: f64 = 1e-3;

/// Push `p` away from its nearest feature until the nearest feature changes.
/// Exponential search brackets the change, bisection narrows it to `tol`.
/// `None` when `p` has no defined direction or the push leaves the boundary.
pub fn retract_to_medial_axis(env: &Environment, p: Point2, tol: f64) -> Option<Point2> {
    let start = env.clearance_query(p);
    let away = p - start.foot;
    let n = away.norm();
    if n < 1e-12 {
        return None;
    }
    let dir = away * (1.0 / n);
    let same = |t: f64| {
        let q = p + dir * t;
        env.point_is_free(q) && env.clearance_query(q).witness == start.witness
    };
    let limit = env.boundary().width().hypot(env.boundary().height());
    let (mut lo, mut hi) = (0.0, start.distance.max(tol));
    while same(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > limit {
            return None;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if same(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(p + dir * lo)
}

/// Uniform samples retracted onto the workspace medial axis before
/// validated k-nearest connection. A retracted pose that is not valid falls
/// back to the original sample.
pub struct MaPrm {
    core: Core,
}

impl MaPrm {
    pub fn new(core: Core) -> Self {
        Self { core }
    }
}

fn place(env: &Environment, q: Configuration) -> Configuration {
    match retract_to_medial_axis(env, q.position(), RETRACTION_TOLERANCE) {
        Some(m) => {
            let r = Configuration { x: m.x, y: m.y, ..q };
            if env.is_valid_full(&r) {
                r
            } else {
                q
            }
        }
        None => q,
    }
}

impl Planner for MaPrm {
    fn name(&self) -> &'static str {
        "maprm"
    }

    fn build(&mut self) -> Result<(), PlanError> {
        while self.core.grow_uniform(place) {}
        Ok(())
    }

    fn solve(&mut self, s: Configuration, g: Configuration, deadline: Instant) -> Result<Path, PlanError> {
        self.core.standard_query(s, g, deadline, |c| c.grow_uniform(place))
    }

    fn roadmap(&self) -> &Roadmap {
        &self.core.rm
    }

    fn sample_attempts(&self) -> usize {
        self.core.attempts.used
    }

    fn sample_limit(&self) -> usize {
        self.core.attempts.limit
    }
}
