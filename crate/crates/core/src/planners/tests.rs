use std::collections::BTreeSet;
use std::time::Duration;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::geometry::{Aabb, Point2, Polygon, RobotModel};
use crate::ids::{EdgeId, SkelEdgeId, VertexId};
use crate::roadmap::{EdgeStatus, ExpansionSettings};
use crate::skeleton::{build_annotated, default_grid_resolution, SkeletonEdge, SkeletonVertex};

fn env_with(obstacles: Vec<Polygon>) -> Arc<Environment> {
    Arc::new(Environment::new(Aabb::new(0.0, 0.0, 10.0, 10.0), obstacles, RobotModel::Point).unwrap())
}

fn deadline() -> Instant {
    Instant::now() + Duration::from_secs(30)
}

fn settings() -> PlannerSettings {
    PlannerSettings {
        resolution: Some(0.05),
        ..PlannerSettings::default()
    }
}

fn small_budget(attempts: usize) -> PlannerBudget {
    PlannerBudget {
        max_sample_attempts: attempts,
        ..PlannerBudget::default()
    }
}

/// Straight skeleton edge from `a` to `b` with intermediates every 0.1.
fn line_skeleton(a: Point2, b: Point2, clearance: f64) -> Arc<AnnotatedSkeleton> {
    let n = (a.distance(b) / 0.1).ceil() as usize;
    let pts = (0..=n).map(|i| a.lerp(b, i as f64 / n as f64)).collect();
    let vertex = |id, position| SkeletonVertex {
        id: VertexId(id),
        position,
        annotation: clearance,
    };
    Arc::new(
        AnnotatedSkeleton::from_parts(
            vec![vertex(0, a), vertex(1, b)],
            vec![SkeletonEdge {
                id: SkelEdgeId(0),
                u: VertexId(0),
                v: VertexId(1),
                weight: clearance,
                intermediates: pts,
            }],
        )
        .unwrap(),
    )
}

fn skeleton_of(env: &Environment) -> Arc<AnnotatedSkeleton> {
    Arc::new(build_annotated(env, default_grid_resolution(env)).unwrap())
}

fn hasp(env: Arc<Environment>, sk: Arc<AnnotatedSkeleton>, budget: PlannerBudget, seed: u64) -> Hasp {
    Hasp::new(Core::new(env, budget, settings(), seed), sk)
}

fn assert_sound(env: &Environment, rm: &Roadmap, path: &Path) {
    let probe = env.with_fresh_counter();
    for (e, w) in path.edges.iter().zip(path.nodes.windows(2)) {
        assert_eq!(rm.edge(*e).status, EdgeStatus::Valid);
        let (a, b) = (rm.node(w[0]).config, rm.node(w[1]).config);
        assert!(
            probe.edge_valid(&a, &b, 0.05, ValidityMode::Full),
            "edge {e} fails a re-check"
        );
    }
}

fn endpoints(rm: &Roadmap, path: &Path) -> (Configuration, Configuration) {
    (
        rm.node(path.nodes[0]).config,
        rm.node(*path.nodes.last().unwrap()).config,
    )
}

#[test]
fn hasp_in_empty_space_needs_no_repair() {
    let env = env_with(vec![]);
    let sk = line_skeleton(Point2::new(2.0, 5.0), Point2::new(8.0, 5.0), 5.0);
    let mut p = hasp(env.clone(), sk, PlannerBudget::default(), 1);
    p.build().unwrap();
    let (s, g) = (Configuration::point(1.0, 5.0), Configuration::point(9.0, 5.0));
    let path = p.solve(s, g, deadline()).unwrap();
    assert!(p.repairer().fix_log.is_empty());
    assert_eq!(endpoints(p.roadmap(), &path), (s, g));
    assert_sound(&env, p.roadmap(), &path);
}

#[test]
fn hasp_routes_around_a_wall_the_skeleton_misses() {
    // a wall with a gap at the top; the skeleton runs straight through it
    let env = env_with(vec![Polygon::rectangle(4.9, 0.0, 5.1, 8.0).unwrap()]);
    let sk = line_skeleton(Point2::new(2.0, 4.0), Point2::new(8.0, 4.0), 2.0);
    let mut p = hasp(env.clone(), sk, PlannerBudget::default(), 3);
    p.build().unwrap();
    let path = p
        .solve(
            Configuration::point(1.0, 4.0),
            Configuration::point(9.0, 4.0),
            deadline(),
        )
        .unwrap();
    assert_sound(&env, p.roadmap(), &path);
    let crossing = p
        .roadmap()
        .edges()
        .iter()
        .find(|e| e.source_skeleton_edge == Some(SkelEdgeId(0)))
        .unwrap();
    assert_eq!(crossing.status, EdgeStatus::Unfixable);
    assert_eq!(p.repairer().fix_log.first(), Some(&crossing.id));
    let over_gap = path.nodes.iter().any(|n| p.roadmap().node(*n).config.y > 8.0);
    assert!(over_gap, "the only way across is over the wall");
}

#[test]
fn every_planner_solves_empty_space() {
    let env = env_with(vec![]);
    let sk = skeleton_of(&env);
    for name in PLANNER_NAMES {
        let mut p = make_planner(
            name,
            env.clone(),
            Some(sk.clone()),
            PlannerBudget::default(),
            settings(),
            5,
        )
        .unwrap();
        p.build().unwrap();
        let (s, g) = (Configuration::point(1.0, 1.0), Configuration::point(9.0, 9.0));
        let path = p.solve(s, g, deadline()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(endpoints(p.roadmap(), &path), (s, g), "{name}");
        assert_sound(&env, p.roadmap(), &path);
    }
}

#[test]
fn sealed_goal_is_never_reached() {
    // a closed ring around (8, 8)
    let env = env_with(vec![
        Polygon::rectangle(7.0, 7.0, 9.0, 7.2).unwrap(),
        Polygon::rectangle(7.0, 8.8, 9.0, 9.0).unwrap(),
        Polygon::rectangle(7.0, 7.2, 7.2, 8.8).unwrap(),
        Polygon::rectangle(8.8, 7.2, 9.0, 8.8).unwrap(),
    ]);
    let sk = skeleton_of(&env);
    for name in PLANNER_NAMES {
        let mut p = make_planner(name, env.clone(), Some(sk.clone()), small_budget(300), settings(), 2).unwrap();
        p.build().unwrap();
        let r = p.solve(
            Configuration::point(1.0, 1.0),
            Configuration::point(8.0, 8.0),
            deadline(),
        );
        assert!(
            matches!(r, Err(PlanError::Disconnected | PlanError::BudgetExhausted)),
            "{name}: {r:?}"
        );
    }
}

#[test]
fn endpoint_in_collision_is_rejected() {
    let env = env_with(vec![Polygon::rectangle(4.0, 4.0, 6.0, 6.0).unwrap()]);
    let mut p = make_planner("basic", env, None, small_budget(50), settings(), 0).unwrap();
    p.build().unwrap();
    let r = p.solve(
        Configuration::point(1.0, 1.0),
        Configuration::point(5.0, 5.0),
        deadline(),
    );
    assert_eq!(r.unwrap_err(), PlanError::InvalidEndpoint);
}

#[test]
fn skeleton_planners_require_a_skeleton() {
    let env = env_with(vec![]);
    for name in ["hasp", "drprm"] {
        let r = make_planner(name, env.clone(), None, PlannerBudget::default(), settings(), 0);
        assert!(matches!(r, Err(PlanError::MissingSkeleton)), "{name}");
    }
    let r = make_planner("rrt", env, None, PlannerBudget::default(), settings(), 0);
    assert!(matches!(r, Err(PlanError::UnknownPlanner(n)) if n == "rrt"));
}

#[test]
fn bad_budgets_are_refused() {
    let env = env_with(vec![]);
    for b in [
        PlannerBudget {
            epsilon: 1.0,
            ..PlannerBudget::default()
        },
        PlannerBudget {
            max_paths: 0,
            ..PlannerBudget::default()
        },
        PlannerBudget {
            time_limit_secs: 0.0,
            ..PlannerBudget::default()
        },
    ] {
        let r = make_planner("basic", env.clone(), None, b, settings(), 0);
        assert!(matches!(r, Err(PlanError::BadBudget(_))));
    }
}

#[test]
fn retraction_lands_on_corridor_midline() {
    let env = Environment::new(
        Aabb::new(0.0, 0.0, 10.0, 10.0),
        vec![
            Polygon::rectangle(0.0, 0.0, 10.0, 4.0).unwrap(),
            Polygon::rectangle(0.0, 6.0, 10.0, 10.0).unwrap(),
        ],
        RobotModel::Point,
    )
    .unwrap();
    let before = env.cd_snapshot();
    for p in [Point2::new(5.0, 4.3), Point2::new(3.0, 5.9), Point2::new(7.0, 5.0004)] {
        let m = retract_to_medial_axis(&env, p, RETRACTION_TOLERANCE).unwrap();
        assert!((m.y - 5.0).abs() <= 2.0 * RETRACTION_TOLERANCE, "{p:?} went to {m:?}");
        assert!((m.x - p.x).abs() < 1e-12);
    }
    assert!(env.cd_snapshot().clearance_calls > before.clearance_calls + 3);
}

#[test]
fn maprm_nodes_sit_near_the_medial_axis() {
    let env = env_with(vec![
        Polygon::rectangle(0.0, 0.0, 10.0, 4.0).unwrap(),
        Polygon::rectangle(0.0, 6.0, 10.0, 10.0).unwrap(),
    ]);
    let mut p = make_planner("maprm", env, None, small_budget(200), settings(), 4).unwrap();
    p.build().unwrap();
    let rm = p.roadmap();
    assert!(rm.node_count() > 10);
    // the medial axis of the corridor is its midline plus the corner bisectors
    let near_axis = rm.nodes().iter().filter(|n| {
        let (x, y) = (n.config.x, n.config.y);
        (y - 5.0).abs() < 0.01 || (x.min(10.0 - x) - (1.0 - (y - 5.0).abs())).abs() < 0.01
    });
    assert_eq!(near_axis.count(), rm.node_count());
}

#[test]
fn every_planner_respects_its_budget() {
    let env = env_with(vec![Polygon::rectangle(3.0, 2.0, 7.0, 8.0).unwrap()]);
    let sk = skeleton_of(&env);
    let base = small_budget(400);
    for name in PLANNER_NAMES {
        let mut p = make_planner(name, env.clone(), Some(sk.clone()), base, settings(), 9).unwrap();
        p.build().unwrap();
        assert!(p.sample_attempts() <= base.max_sample_attempts, "{name}");
        for (s, g) in [((1.0, 1.0), (9.0, 9.0)), ((9.0, 1.0), (1.0, 9.0))] {
            let _ = p.solve(
                Configuration::point(s.0, s.1),
                Configuration::point(g.0, g.1),
                deadline(),
            );
        }
        assert_eq!(
            p.sample_limit(),
            base.max_sample_attempts + 2 * settings().query_attempts,
            "{name}"
        );
        assert!(p.sample_attempts() <= p.sample_limit(), "{name}");
    }
}

#[test]
fn planners_are_deterministic() {
    let env = env_with(vec![Polygon::rectangle(3.0, 2.0, 7.0, 8.0).unwrap()]);
    let sk = skeleton_of(&env);
    for name in PLANNER_NAMES {
        let run = || {
            let env = Arc::new(env.with_fresh_counter());
            let mut p = make_planner(name, env.clone(), Some(sk.clone()), small_budget(400), settings(), 21).unwrap();
            p.build().unwrap();
            let path = p
                .solve(
                    Configuration::point(1.0, 5.0),
                    Configuration::point(9.0, 5.0),
                    deadline(),
                )
                .ok()
                .map(|p| p.nodes);
            (
                path,
                p.roadmap().node_count(),
                p.roadmap().edge_count(),
                env.cd_snapshot(),
            )
        };
        assert_eq!(run(), run(), "{name}");
    }
}

/// Two nodes joined by a lazy edge that crosses a wall, tagged with a
/// single-edge skeleton.
fn blocked_edge() -> (Arc<Environment>, Arc<AnnotatedSkeleton>, Roadmap, EdgeId) {
    let env = env_with(vec![Polygon::rectangle(4.9, 0.0, 5.1, 10.0).unwrap()]);
    let sk = line_skeleton(Point2::new(2.0, 5.0), Point2::new(8.0, 5.0), 2.0);
    let mut rm = Roadmap::new(&env);
    let a = rm.add_node(Configuration::point(2.0, 5.0), Some(VertexId(0)));
    let b = rm.add_node(Configuration::point(8.0, 5.0), Some(VertexId(1)));
    let e = rm.add_edge(a, b, EdgeStatus::Unvalidated, Some(SkelEdgeId(0))).unwrap();
    assert!(!rm.validate_edge(&env, e, 0.05));
    (env, sk, rm, e)
}

#[test]
fn fix_edge_twice_is_a_precondition_error() {
    let (env, sk, mut rm, e) = blocked_edge();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut budget = SampleBudget::new(200);
    let mut scope = RepairScope {
        rm: &mut rm,
        env: &env,
        sk: &sk,
        rng: &mut rng,
        budget: &mut budget,
        settings: ExpansionSettings::for_env(&env, 8, 2, 0.05),
    };
    let mut repairer = Repairer::new(FixOrder::Descending, 10);
    assert!(!repairer.fix_edge(e, &mut scope).unwrap());
    assert!(repairer.is_resolved(e));
    assert!(matches!(
        repairer.fix_edge(e, &mut scope),
        Err(PlanError::Precondition(_))
    ));
}

#[test]
fn fix_path_marks_the_blocked_edge_unfixable() {
    let (env, sk, mut rm, e) = blocked_edge();
    let path = Path::from_nodes(&rm, vec![NodeId(0), NodeId(1)]).unwrap();
    let record = PathRecord::new(&rm, &path);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut budget = SampleBudget::new(200);
    let mut scope = RepairScope {
        rm: &mut rm,
        env: &env,
        sk: &sk,
        rng: &mut rng,
        budget: &mut budget,
        settings: ExpansionSettings::for_env(&env, 8, 2, 0.05),
    };
    let mut repairer = Repairer::new(FixOrder::Descending, 10);
    let report = repairer.fix_path(&record, &mut scope).unwrap();
    assert!(!report.fixed);
    assert_eq!(report.unfixable, BTreeSet::from([e]));
    assert_eq!(rm.edge(e).status, EdgeStatus::Unfixable);
    assert!(!rm.same_component(NodeId(0), NodeId(1)));
}

#[test]
fn fix_edge_on_a_valid_edge_is_refused() {
    let env = env_with(vec![]);
    let sk = line_skeleton(Point2::new(2.0, 5.0), Point2::new(8.0, 5.0), 2.0);
    let mut rm = Roadmap::new(&env);
    let a = rm.add_node(Configuration::point(2.0, 5.0), Some(VertexId(0)));
    let b = rm.add_node(Configuration::point(8.0, 5.0), Some(VertexId(1)));
    let e = rm.add_edge(a, b, EdgeStatus::Valid, Some(SkelEdgeId(0))).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut budget = SampleBudget::new(10);
    let mut scope = RepairScope {
        rm: &mut rm,
        env: &env,
        sk: &sk,
        rng: &mut rng,
        budget: &mut budget,
        settings: ExpansionSettings::for_env(&env, 8, 2, 0.05),
    };
    let r = Repairer::new(FixOrder::Descending, 10).fix_edge(e, &mut scope);
    assert!(matches!(r, Err(PlanError::Precondition(_))));
}

#[test]
fn fix_order_sorts_by_cost_then_id() {
    let env = env_with(vec![]);
    let mut rm = Roadmap::new(&env);
    let o = rm.add_node(Configuration::point(0.0, 0.0), None);
    let lens = [2.0, 1.0, 3.0, 1.0];
    let edges: Vec<EdgeId> = lens
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let angle = i as f64;
            let n = rm.add_node(Configuration::point(l * angle.cos(), l * angle.sin()), None);
            rm.add_edge(o, n, EdgeStatus::Invalid, None).unwrap()
        })
        .collect();
    let mut v = edges.clone();
    FixOrder::Descending.arrange(&rm, &mut v);
    assert_eq!(v, vec![edges[2], edges[0], edges[1], edges[3]]);
    FixOrder::Ascending.arrange(&rm, &mut v);
    assert_eq!(v, vec![edges[1], edges[3], edges[0], edges[2]]);
}

#[test]
fn build_path_set_returns_a_valid_path_at_once() {
    let env = env_with(vec![]);
    let mut rm = Roadmap::new(&env);
    let ids: Vec<NodeId> = [(1.0, 1.0), (5.0, 1.0), (9.0, 1.0)]
        .iter()
        .map(|&(x, y)| rm.add_node(Configuration::point(x, y), None))
        .collect();
    rm.add_edge(ids[0], ids[1], EdgeStatus::Valid, None);
    rm.add_edge(ids[1], ids[2], EdgeStatus::Unvalidated, None);
    let mut ps = PathSet::new();
    let out = build_path_set(&mut rm, &env, ids[0], ids[2], &PlannerBudget::default(), 0.05, &mut ps);
    let BuildOutcome::Found(p) = out else {
        panic!("expected a path, got {out:?}");
    };
    assert_eq!(p.nodes, ids);
    assert_eq!(ps.len(), 1);
    assert_eq!(rm.count_status(EdgeStatus::Unvalidated), 0);
    let out = build_path_set(&mut rm, &env, ids[0], ids[0], &PlannerBudget::default(), 0.05, &mut ps);
    assert_eq!(out, BuildOutcome::Found(Path::singleton(ids[0])));
}

#[test]
fn build_path_set_without_candidates() {
    let env = env_with(vec![]);
    let mut rm = Roadmap::new(&env);
    let a = rm.add_node(Configuration::point(1.0, 1.0), None);
    let b = rm.add_node(Configuration::point(9.0, 1.0), None);
    rm.add_edge(a, b, EdgeStatus::Invalid, None);
    let mut ps = PathSet::new();
    let out = build_path_set(&mut rm, &env, a, b, &PlannerBudget::default(), 0.05, &mut ps);
    assert_eq!(out, BuildOutcome::NoCandidate);
    assert!(ps.is_empty());
}

/// Random roadmap over `n` points with mixed statuses, plus random simple
/// paths through it.
fn random_records(seed: u64, n: usize) -> (Roadmap, Vec<PathRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rm = Roadmap::with_rotation_weight(0.0);
    for _ in 0..n {
        rm.add_node(
            Configuration::point(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)),
            None,
        );
    }
    let statuses = [EdgeStatus::Valid, EdgeStatus::Invalid, EdgeStatus::Unvalidated];
    let mut records = Vec::new();
    for _ in 0..8 {
        let len = rng.gen_range(2..=n.min(6));
        let mut nodes: Vec<NodeId> = (0..n).map(NodeId).collect();
        for i in 0..len {
            let j = rng.gen_range(i..n);
            nodes.swap(i, j);
        }
        nodes.truncate(len);
        for w in nodes.windows(2) {
            if rm.find_edge(w[0], w[1]).is_none() {
                let s = statuses[rng.gen_range(0..3)];
                rm.add_edge(w[0], w[1], s, None);
            }
        }
        records.push(PathRecord::new(&rm, &Path::from_nodes(&rm, nodes).unwrap()));
    }
    (rm, records)
}

proptest! {
    #[test]
    fn path_set_stays_ordered(seed in 0u64..1000) {
        let (_, records) = random_records(seed, 10);
        let mut ps = PathSet::new();
        for r in records {
            ps.insert(r);
            prop_assert!(ps.is_ordered());
        }
        let mut last = f64::NEG_INFINITY;
        while let Some(r) = ps.pop_front() {
            prop_assert!(r.lower_bound_cost >= last);
            last = r.lower_bound_cost;
        }
    }

    #[test]
    fn records_partition_their_edges(seed in 0u64..1000) {
        let (rm, records) = random_records(seed, 10);
        for r in records {
            let all: BTreeSet<EdgeId> = r.edges.iter().copied().collect();
            let union: BTreeSet<EdgeId> = r.valid_edges.iter().chain(&r.invalid_edges).chain(&r.unvalidated_edges).copied().collect();
            prop_assert_eq!(&all, &union);
            prop_assert_eq!(r.valid_edges.len() + r.invalid_edges.len() + r.unvalidated_edges.len(), all.len());
            let sum = r.edges.iter().fold(0.0, |acc, e| acc + rm.edge(*e).cost);
            prop_assert!((sum - r.lower_bound_cost).abs() < 1e-9);
            prop_assert!(r.is_current(&rm));
        }
    }

    #[test]
    fn unfixable_edges_leave_the_path_set(seed in 0u64..1000, picks in proptest::collection::vec(0usize..40, 1..4)) {
        let (rm, records) = random_records(seed, 10);
        let mut ps = PathSet::new();
        for r in records.iter().cloned() {
            ps.insert(r);
        }
        let unfixable: BTreeSet<EdgeId> = picks.into_iter().filter(|&i| i < rm.edge_count()).map(EdgeId).collect();
        let before: Vec<PathRecord> = ps.iter().cloned().collect();
        update_path_set(&mut ps, &unfixable);
        prop_assert!(ps.is_ordered());
        for r in ps.iter() {
            prop_assert!(unfixable.iter().all(|e| !r.contains(*e)));
        }
        let expected: Vec<&PathRecord> = before.iter().filter(|r| unfixable.iter().all(|e| !r.contains(*e))).collect();
        prop_assert_eq!(expected, ps.iter().collect::<Vec<_>>());
    }
}
