use std::collections::VecDeque;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::counter::{CdSnapshot, CollisionCounter};
use super::polygon::{Polygon, RobotModel};
use super::primitives::{closest_point_on_segment, point_in_ring, rings_cross, Aabb, Point2};
use super::GeometryError;
use crate::space::Configuration;

/// Which validity predicate a check uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidityMode {
    /// Exact intersection including containment.
    Full,
    /// Surface-crossing only; a robot buried inside an obstacle passes.
    Partial,
}

/// Which feature realises a clearance value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Witness {
    Obstacle(usize),
    /// Boundary side: 0 bottom, 1 right, 2 top, 3 left.
    Boundary(u8),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClearanceQuery {
    pub distance: f64,
    pub witness: Witness,
    /// Closest point on the witness feature.
    pub foot: Point2,
}

/// A planar workspace: rectangular boundary, polygonal obstacles and a robot.
///
/// Clones share the collision counter; use [`Environment::with_fresh_counter`]
/// for an independently instrumented copy.
#[derive(Clone, Debug)]
pub struct Environment {
    boundary: Aabb,
    obstacles: Vec<Polygon>,
    robot: RobotModel,
    counter: Arc<CollisionCounter>,
}

impl Environment {
    pub fn new(boundary: Aabb, obstacles: Vec<Polygon>, robot: RobotModel) -> Result<Self, GeometryError> {
        if !(boundary.width() > 0.0 && boundary.height() > 0.0) {
            return Err(GeometryError::EmptyBoundary);
        }
        for (i, o) in obstacles.iter().enumerate() {
            if !boundary.contains_aabb(o.aabb()) {
                return Err(GeometryError::ObstacleOutsideBoundary(i));
            }
        }
        let covered: f64 = obstacles.iter().map(Polygon::area).sum();
        if covered >= boundary.width() * boundary.height() {
            return Err(GeometryError::NoFreeSpace);
        }
        Ok(Self {
            boundary,
            obstacles,
            robot,
            counter: Arc::new(CollisionCounter::new()),
        })
    }

    pub fn boundary(&self) -> &Aabb {
        &self.boundary
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    pub fn robot(&self) -> &RobotModel {
        &self.robot
    }

    pub fn counter(&self) -> &CollisionCounter {
        &self.counter
    }

    pub fn cd_snapshot(&self) -> CdSnapshot {
        self.counter.snapshot()
    }

    /// Same geometry, separate zeroed counter.
    pub fn with_fresh_counter(&self) -> Self {
        Self {
            counter: Arc::new(CollisionCounter::new()),
            ..self.clone()
        }
    }

    /// Weight applied to angular distance in the C-space metric.
    pub fn rotation_weight(&self) -> f64 {
        self.robot.bounding_radius()
    }

    pub fn config_distance(&self, a: &Configuration, b: &Configuration) -> f64 {
        a.distance(b, self.rotation_weight())
    }

    /// 5% of the smaller boundary dimension.
    pub fn default_resolution(&self) -> f64 {
        0.05 * self.boundary.width().min(self.boundary.height())
    }

    pub fn is_valid(&self, q: &Configuration, mode: ValidityMode) -> bool {
        match mode {
            ValidityMode::Full => self.is_valid_full(q),
            ValidityMode::Partial => self.is_valid_partial(q),
        }
    }

    pub fn is_valid_full(&self, q: &Configuration) -> bool {
        self.counter.bump_full();
        self.full_check(q)
    }

    pub fn is_valid_partial(&self, q: &Configuration) -> bool {
        self.counter.bump_partial();
        if self.robot.is_point() {
            // a point has no surface to cross
            return self.full_check(q);
        }
        let placed = self.robot.placed(q.x, q.y, q.theta);
        if !placed.iter().all(|p| self.boundary.contains(*p)) {
            return false;
        }
        let bb = Aabb::from_points(&placed);
        !self
            .obstacles
            .iter()
            .any(|o| bb.overlaps(o.aabb()) && rings_cross(&placed, o.vertices()))
    }

    fn full_check(&self, q: &Configuration) -> bool {
        let placed = self.robot.placed(q.x, q.y, q.theta);
        if !placed.iter().all(|p| self.boundary.contains(*p)) {
            return false;
        }
        if let [p] = placed.as_slice() {
            return !self.obstacles.iter().any(|o| o.contains(*p));
        }
        let bb = Aabb::from_points(&placed);
        !self.obstacles.iter().any(|o| {
            bb.overlaps(o.aabb())
                && (rings_cross(&placed, o.vertices())
                    || o.contains(placed[0])
                    || point_in_ring(o.vertices()[0], &placed))
        })
    }

    /// Workspace point inside the boundary and outside every obstacle. Not counted.
    pub fn point_is_free(&self, p: Point2) -> bool {
        self.boundary.contains(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    /// Distance to the nearest obstacle edge or boundary side.
    pub fn clearance(&self, p: Point2) -> f64 {
        self.clearance_query(p).distance
    }

    /// Clearance with the realising feature. Counts as one clearance call.
    pub fn clearance_query(&self, p: Point2) -> ClearanceQuery {
        self.counter.bump_clearance();
        self.nearest_feature(p)
    }

    fn nearest_feature(&self, p: Point2) -> ClearanceQuery {
        let b = &self.boundary;
        let corners = b.corners();
        let mut best = ClearanceQuery {
            distance: f64::INFINITY,
            witness: Witness::Boundary(0),
            foot: p,
        };
        for side in 0..4u8 {
            let a = corners[side as usize];
            let c = corners[(side as usize + 1) % 4];
            let foot = closest_point_on_segment(p, a, c);
            let d = p.distance(foot);
            if d < best.distance {
                best = ClearanceQuery {
                    distance: d,
                    witness: Witness::Boundary(side),
                    foot,
                };
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            // the bounding box distance is a lower bound on the edge distance
            let bb = o.aabb();
            let dx = (bb.min.x - p.x).max(p.x - bb.max.x).max(0.0);
            let dy = (bb.min.y - p.y).max(p.y - bb.max.y).max(0.0);
            if dx.hypot(dy) >= best.distance {
                continue;
            }
            for (a, c) in o.segments() {
                let foot = closest_point_on_segment(p, a, c);
                let d = p.distance(foot);
                if d < best.distance {
                    best = ClearanceQuery {
                        distance: d,
                        witness: Witness::Obstacle(i),
                        foot,
                    };
                }
            }
        }
        best
    }

    /// Straight-line local planner. Samples are spaced so the robot's workspace
    /// displacement between consecutive checks is at most `resolution`, and are
    /// visited midpoint-first so blocked edges fail early.
    pub fn edge_valid(&self, q1: &Configuration, q2: &Configuration, resolution: f64, mode: ValidityMode) -> bool {
        assert!(resolution > 0.0, "edge resolution must be positive");
        // fixed direction keeps the sample set identical for (q1, q2) and (q2, q1)
        let (a, b) = if q2.lex_cmp(q1).is_lt() { (q2, q1) } else { (q1, q2) };
        let sweep = self.config_distance(a, b);
        if sweep == 0.0 {
            return self.is_valid(a, mode);
        }
        let steps = (sweep / resolution).ceil().max(1.0) as usize;
        bisection_order(steps).into_iter().all(|i| {
            let q = if i == steps {
                *b
            } else {
                a.interpolate(b, i as f64 / steps as f64)
            };
            self.is_valid(&q, mode)
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self, GeometryError> {
        let file: EnvironmentFile = serde_json::from_str(s)?;
        file.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&EnvironmentFile::from(self)).expect("environment serialises")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

/// Interior indices in breadth-first bisection order, then both endpoints.
fn bisection_order(steps: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(steps + 1);
    let mut queue = VecDeque::from([(0usize, steps)]);
    while let Some((lo, hi)) = queue.pop_front() {
        if hi - lo < 2 {
            continue;
        }
        let mid = lo + (hi - lo) / 2;
        order.push(mid);
        queue.push_back((lo, mid));
        queue.push_back((mid, hi));
    }
    order.push(0);
    order.push(steps);
    order
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RobotFile {
    Point,
    Rigid { shape: Vec<Point2> },
}

/// On-disk environment layout.
#[derive(Debug, Serialize, Deserialize)]
struct EnvironmentFile {
    boundary: [f64; 4],
    robot: RobotFile,
    obstacles: Vec<Vec<Point2>>,
}

impl TryFrom<EnvironmentFile> for Environment {
    type Error = GeometryError;
    fn try_from(f: EnvironmentFile) -> Result<Self, Self::Error> {
        let [xmin, ymin, xmax, ymax] = f.boundary;
        let robot = match f.robot {
            RobotFile::Point => RobotModel::Point,
            RobotFile::Rigid { shape } => RobotModel::rigid(Polygon::new(shape)?),
        };
        let obstacles = f
            .obstacles
            .into_iter()
            .map(Polygon::new)
            .collect::<Result<Vec<_>, _>>()?;
        Environment::new(Aabb::new(xmin, ymin, xmax, ymax), obstacles, robot)
    }
}

impl From<&Environment> for EnvironmentFile {
    fn from(env: &Environment) -> Self {
        let b = env.boundary;
        Self {
            boundary: [b.min.x, b.min.y, b.max.x, b.max.y],
            robot: match &env.robot {
                RobotModel::Point => RobotFile::Point,
                RobotModel::Rigid { shape, .. } => RobotFile::Rigid {
                    shape: shape.vertices().to_vec(),
                },
            },
            obstacles: env.obstacles.iter().map(|o| o.vertices().to_vec()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::point_segment_distance;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn square_robot(half: f64) -> RobotModel {
        RobotModel::rigid(Polygon::rectangle(-half, -half, half, half).unwrap())
    }

    fn env_with(obstacles: Vec<Polygon>, robot: RobotModel) -> Environment {
        Environment::new(Aabb::new(0.0, 0.0, 10.0, 10.0), obstacles, robot).unwrap()
    }

    /// Separating-axis overlap test for two convex polygons; closed sets.
    fn sat_overlap(a: &[Point2], b: &[Point2]) -> bool {
        for poly in [a, b] {
            for i in 0..poly.len() {
                let e = poly[(i + 1) % poly.len()] - poly[i];
                let axis = Point2::new(-e.y, e.x);
                let (amin, amax) = project(a, axis);
                let (bmin, bmax) = project(b, axis);
                if amax < bmin || bmax < amin {
                    return false;
                }
            }
        }
        true
    }

    fn project(poly: &[Point2], axis: Point2) -> (f64, f64) {
        poly.iter()
            .map(|p| p.dot(axis))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    #[test]
    fn point_robot_in_empty_space_and_inside_obstacle() {
        let env = env_with(vec![], RobotModel::Point);
        assert!(env.is_valid_full(&Configuration::point(5.0, 5.0)));
        let block = Polygon::rectangle(2.0, 2.0, 4.0, 3.0).unwrap();
        let c = block.centroid();
        let env = env_with(vec![block], RobotModel::Point);
        assert!(!env.is_valid_full(&Configuration::point(c.x, c.y)));
        assert_eq!(env.cd_snapshot().full_cd_calls, 1);
    }

    #[test]
    fn rigid_square_near_edge_matches_sat() {
        let obstacle = Polygon::rectangle(5.0, 0.0, 8.0, 10.0).unwrap();
        let env = env_with(vec![obstacle.clone()], square_robot(1.0));
        // robot centre 0.5 from the obstacle's left edge: its right side overlaps by 0.5
        let q = Configuration::new(4.5, 5.0, 0.0);
        let placed = env.robot().placed(q.x, q.y, q.theta);
        assert!(sat_overlap(&placed, obstacle.vertices()));
        assert!(!env.is_valid_full(&q));
        let clear = Configuration::new(3.5, 5.0, 0.0);
        let placed = env.robot().placed(clear.x, clear.y, clear.theta);
        assert_eq!(sat_overlap(&placed, obstacle.vertices()), !env.is_valid_full(&clear));
    }

    #[test]
    fn full_check_agrees_with_sat_on_random_poses() {
        let obstacle = Polygon::regular(Point2::new(5.0, 5.0), 2.0, 6).unwrap();
        let env = env_with(vec![obstacle.clone()], square_robot(0.6));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let q = Configuration::new(
                rng.gen_range(1.0..9.0),
                rng.gen_range(1.0..9.0),
                rng.gen_range(-3.1..3.1),
            );
            let placed = env.robot().placed(q.x, q.y, q.theta);
            assert_eq!(
                env.is_valid_full(&q),
                !sat_overlap(&placed, obstacle.vertices()),
                "{q:?}"
            );
        }
    }

    #[test]
    fn partial_misses_containment() {
        let big = Polygon::rectangle(2.0, 2.0, 8.0, 8.0).unwrap();
        let env = env_with(vec![big], square_robot(0.5));
        let inside = Configuration::new(5.0, 5.0, 0.3);
        assert!(env.is_valid_partial(&inside));
        assert!(!env.is_valid_full(&inside));
        let straddle = Configuration::new(2.0, 5.0, 0.0);
        assert!(!env.is_valid_partial(&straddle));
        let s = env.cd_snapshot();
        assert_eq!((s.full_cd_calls, s.partial_cd_calls, s.clearance_calls), (1, 2, 0));
    }

    #[test]
    fn partial_point_robot_agrees_with_full() {
        let tri = Polygon::new(vec![
            Point2::new(2.0, 2.0),
            Point2::new(8.0, 3.0),
            Point2::new(4.0, 8.0),
        ])
        .unwrap();
        let env = env_with(vec![tri.clone()], RobotModel::Point);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let q = Configuration::point(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            let oracle = !point_in_ring(q.position(), tri.vertices());
            assert_eq!(env.is_valid_partial(&q), oracle);
        }
        assert_eq!(env.cd_snapshot().partial_cd_calls, 1000);
        assert_eq!(env.cd_snapshot().full_cd_calls, 0);
    }

    #[test]
    fn clearance_examples() {
        let env = env_with(vec![], RobotModel::Point);
        assert_eq!(env.clearance(Point2::new(5.0, 5.0)), 5.0);
        let sq = Polygon::rectangle(4.0, 4.0, 5.0, 5.0).unwrap();
        let env = env_with(vec![sq.clone()], RobotModel::Point);
        assert_eq!(env.clearance(Point2::new(4.5, 4.0)), 0.0);
        // brute force over densely sampled segments
        let p = Point2::new(2.0, 2.0);
        let mut segs: Vec<(Point2, Point2)> = sq.segments().collect();
        let corners = env.boundary().corners();
        segs.extend((0..4).map(|i| (corners[i], corners[(i + 1) % 4])));
        let mut brute = f64::INFINITY;
        for (a, b) in segs {
            for k in 0..=10_000 {
                brute = brute.min(p.distance(a.lerp(b, k as f64 / 10_000.0)));
            }
        }
        let c = env.clearance(p);
        assert!((c - 2.0).abs() < 1e-12);
        assert!((c - brute).abs() < 1e-6);
        assert_eq!(env.cd_snapshot().clearance_calls, 2);
    }

    #[test]
    fn edge_examples() {
        let wall = Polygon::rectangle(4.0, 0.0, 6.0, 7.0).unwrap();
        let env = env_with(vec![wall.clone()], RobotModel::Point);
        let q = Configuration::point(2.0, 2.0);
        assert!(env.edge_valid(&q, &q, 0.05, ValidityMode::Full));
        assert!(!env.edge_valid(&q, &Configuration::point(8.0, 2.0), 0.05, ValidityMode::Full));
        // passes 0.1 above the wall top
        let a = Configuration::point(1.0, 7.1);
        let b = Configuration::point(9.0, 7.1);
        assert!(env.edge_valid(&a, &b, 0.05, ValidityMode::Full));
        let fine = (0..=1600).all(|i| !wall.contains(a.interpolate(&b, i as f64 / 1600.0).position()));
        assert!(fine);
        let grazing = (0..=1600).all(|i| {
            point_segment_distance(
                a.interpolate(&b, i as f64 / 1600.0).position(),
                Point2::new(4.0, 7.0),
                Point2::new(6.0, 7.0),
            ) > 0.0
        });
        assert!(grazing);
    }

    #[test]
    fn edge_step_bound_includes_rotation() {
        let env = env_with(vec![], square_robot(1.0));
        let r = env.robot().bounding_radius();
        let a = Configuration::new(5.0, 5.0, 0.0);
        let b = Configuration::new(5.0, 5.0, 1.0);
        env.counter().reset();
        assert!(env.edge_valid(&a, &b, 0.1, ValidityMode::Full));
        let expected = (r * 1.0 / 0.1_f64).ceil() as u64 + 1;
        assert_eq!(env.cd_snapshot().full_cd_calls, expected);
    }

    #[test]
    fn bisection_visits_every_sample_once() {
        for n in 1..40 {
            let mut order = bisection_order(n);
            assert_eq!(order[0], if n >= 2 { n / 2 } else { 0 });
            order.sort_unstable();
            assert_eq!(order, (0..=n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"boundary":[0,0,10,8],"robot":{"kind":"rigid","shape":[[-0.5,-0.5],[0.5,-0.5],[0.5,0.5],[-0.5,0.5]]},
            "obstacles":[[[1,1],[2,1],[2,2],[1,2]]]}"#;
        let env = Environment::from_json_str(text).unwrap();
        assert_eq!(env.obstacles().len(), 1);
        assert!((env.robot().bounding_radius() - 0.5f64.hypot(0.5)).abs() < 1e-12);
        let again = Environment::from_json_str(&env.to_json_string()).unwrap();
        assert_eq!(again.obstacles(), env.obstacles());
        let bad = r#"{"boundary":[0,0,10,8],"robot":{"kind":"point"},"obstacles":[[[1,1],[20,1],[2,2]]]}"#;
        assert!(matches!(
            Environment::from_json_str(bad),
            Err(GeometryError::ObstacleOutsideBoundary(0))
        ));
    }

    fn clutter_env(robot: RobotModel) -> Environment {
        let obstacles = vec![
            Polygon::rectangle(1.0, 1.0, 3.0, 4.0).unwrap(),
            Polygon::regular(Point2::new(6.5, 6.5), 1.5, 5).unwrap(),
            Polygon::new(vec![
                Point2::new(5.0, 1.0),
                Point2::new(9.0, 1.5),
                Point2::new(6.0, 3.5),
            ])
            .unwrap(),
        ];
        env_with(obstacles, robot)
    }

    proptest! {
        #[test]
        fn full_validity_implies_partial(x in 0.0..10.0f64, y in 0.0..10.0f64, t in -PI..PI) {
            let env = clutter_env(square_robot(0.7));
            let q = Configuration::new(x, y, t);
            if env.is_valid_full(&q) {
                prop_assert!(env.is_valid_partial(&q));
            }
        }

        #[test]
        fn edge_validity_is_symmetric(
            x1 in 0.5..9.5f64, y1 in 0.5..9.5f64, t1 in -PI..PI,
            x2 in 0.5..9.5f64, y2 in 0.5..9.5f64, t2 in -PI..PI,
        ) {
            let env = clutter_env(square_robot(0.3));
            let a = Configuration::new(x1, y1, t1);
            let b = Configuration::new(x2, y2, t2);
            for mode in [ValidityMode::Full, ValidityMode::Partial] {
                prop_assert_eq!(env.edge_valid(&a, &b, 0.1, mode), env.edge_valid(&b, &a, 0.1, mode));
            }
        }

        #[test]
        fn clearance_zero_only_on_segments(x in 0.0..10.0f64, y in 0.0..10.0f64) {
            let env = clutter_env(RobotModel::Point);
            let p = Point2::new(x, y);
            let c = env.clearance(p);
            let on_any = env.obstacles().iter().any(|o| o.segments().any(|(a, b)| point_segment_distance(p, a, b) <= 1e-9))
                || x <= 1e-9 || y <= 1e-9 || 10.0 - x <= 1e-9 || 10.0 - y <= 1e-9;
            prop_assert_eq!(c <= 1e-9, on_any);
        }

        #[test]
        fn every_query_bumps_one_counter(n_full in 0usize..20, n_partial in 0usize..20, n_clear in 0usize..20) {
            let env = clutter_env(square_robot(0.5));
            let q = Configuration::new(5.0, 5.0, 0.0);
            for _ in 0..n_full { env.is_valid_full(&q); }
            for _ in 0..n_partial { env.is_valid_partial(&q); }
            for _ in 0..n_clear { env.clearance(q.position()); }
            let s = env.cd_snapshot();
            prop_assert_eq!((s.full_cd_calls, s.partial_cd_calls, s.clearance_calls), (n_full as u64, n_partial as u64, n_clear as u64));
        }
    }
}
