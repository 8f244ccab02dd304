//! Desk-scale benchmark environments with their query tours.

use std::f64::consts::FRAC_PI_2;

use hasp_core::geometry::{Aabb, Environment, Point2, Polygon, RobotModel};
use hasp_core::planners::PlannerBudget;
use hasp_core::Configuration;

use crate::scenario::Scenario;

/// Edge-check resolution shared by the fixtures: a third of the rigid robot's
/// half width, well below the environment default.
pub const FIXTURE_RESOLUTION: f64 = 0.05;

/// 0.5 x 0.3 rectangle centred on its reference point.
pub fn create_robot() -> RobotModel {
    RobotModel::rigid(Polygon::rectangle(-0.25, -0.15, 0.25, 0.15).expect("robot outline"))
}

/// Both endpoints of every leg of the closed tour A -> B -> C -> A.
fn tour(a: Configuration, b: Configuration, c: Configuration) -> Vec<(Configuration, Configuration)> {
    vec![(a, b), (b, c), (c, a)]
}

fn rect(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Polygon {
    Polygon::rectangle(xmin, ymin, xmax, ymax).expect("fixture rectangle")
}

fn rhombus(cx: f64, cy: f64, rx: f64, ry: f64) -> Polygon {
    Polygon::new(vec![
        Point2::new(cx, cy - ry),
        Point2::new(cx + rx, cy),
        Point2::new(cx, cy + ry),
        Point2::new(cx - rx, cy),
    ])
    .expect("fixture rhombus")
}

/// Rigid robot in a 20 x 12 room split by a central block: a wide corridor
/// above it and a narrow one below, plus a few boxes in the side rooms.
pub fn make_create() -> Scenario {
    let obstacles = vec![
        rect(6.0, 1.0, 14.0, 8.5),
        rect(2.5, 6.0, 3.5, 9.0),
        rect(16.5, 3.5, 17.5, 6.5),
        rect(0.0, 4.0, 1.5, 4.8),
    ];
    let env = Environment::new(Aabb::new(0.0, 0.0, 20.0, 12.0), obstacles, create_robot()).expect("create fixture");
    let queries = tour(
        Configuration::new(2.0, 2.0, 0.0),
        Configuration::new(18.5, 10.5, FRAC_PI_2),
        Configuration::new(18.5, 1.5, 0.0),
    );
    Scenario::new(
        "create",
        env,
        queries,
        PlannerBudget::default(),
        Some(FIXTURE_RESOLUTION),
    )
}

/// Point robot with three rhombi stacked across a 20 x 20 room; the four gaps
/// between them and the walls have distinct widths.
pub fn make_rhombus() -> Scenario {
    let obstacles = vec![
        rhombus(10.0, 4.1, 3.0, 2.3),
        rhombus(10.0, 10.0, 3.0, 3.0),
        rhombus(10.0, 16.65, 3.0, 2.45),
    ];
    let env = Environment::new(Aabb::new(0.0, 0.0, 20.0, 20.0), obstacles, RobotModel::Point).expect("rhombus fixture");
    let queries = tour(
        Configuration::point(2.0, 3.0),
        Configuration::point(18.0, 17.0),
        Configuration::point(2.0, 17.0),
    );
    Scenario::new(
        "rhombus",
        env,
        queries,
        PlannerBudget::default(),
        Some(FIXTURE_RESOLUTION),
    )
}

/// Shelf lengths cycled through the columns so aisles differ in length.
const SHELF_LENGTHS: [f64; 7] = [2.0, 3.2, 2.6, 1.6, 3.6, 2.2, 2.9];
const SHELVES_PER_COLUMN: usize = 5;
const SHELF_WIDTH: f64 = 0.8;
const AISLE_WIDTH: f64 = 1.6;
const CROSS_AISLE: f64 = 1.2;
const MARGIN: f64 = 1.5;

/// Grocery-store layout: `n_obstacles` shelves in columns of five, separated
/// by long aisles and staggered cross aisles. Rigid robot.
pub fn make_store(n_obstacles: usize) -> Scenario {
    let columns = n_obstacles.div_ceil(SHELVES_PER_COLUMN).max(1);
    let mut obstacles = Vec::with_capacity(n_obstacles);
    let mut top: f64 = 0.0;
    for i in 0..n_obstacles {
        let (col, row) = (i / SHELVES_PER_COLUMN, i % SHELVES_PER_COLUMN);
        let x = MARGIN + col as f64 * (SHELF_WIDTH + AISLE_WIDTH);
        let mut y = MARGIN;
        for r in 0..row {
            y += SHELF_LENGTHS[(col + r) % SHELF_LENGTHS.len()] + CROSS_AISLE;
        }
        let len = SHELF_LENGTHS[(col + row) % SHELF_LENGTHS.len()];
        obstacles.push(rect(x, y, x + SHELF_WIDTH, y + len));
        top = top.max(y + len);
    }
    let width = 2.0 * MARGIN + columns as f64 * (SHELF_WIDTH + AISLE_WIDTH) - AISLE_WIDTH;
    let height = top + MARGIN;
    let env = Environment::new(Aabb::new(0.0, 0.0, width, height), obstacles, create_robot()).expect("store fixture");
    // the middle aisle, halfway up
    let mid_col = (columns / 2).max(1);
    let aisle_x = MARGIN + mid_col as f64 * (SHELF_WIDTH + AISLE_WIDTH) - AISLE_WIDTH / 2.0;
    let queries = tour(
        Configuration::new(0.75, 0.75, 0.0),
        Configuration::new(width - 0.75, height - 0.75, 0.0),
        Configuration::new(aisle_x, height / 2.0, FRAC_PI_2),
    );
    Scenario::new(
        "store",
        env,
        queries,
        PlannerBudget::default(),
        Some(FIXTURE_RESOLUTION),
    )
}

/// The three benchmark fixtures at their default sizes.
pub fn all_fixtures() -> Vec<Scenario> {
    vec![make_create(), make_rhombus(), make_store(50)]
}
