//! Scenario files, single trials and suites.

use std::path::Path;

use hasp_bench::fixtures::{all_fixtures, make_rhombus, make_store};
use hasp_bench::suite::{resolve_scenario, run_suite, SuiteConfig, TIME_COLUMNS};
use hasp_bench::{run_trial, Scenario, ScenarioError};
use hasp_core::geometry::{Aabb, Environment, Polygon, RobotModel};
use hasp_core::planners::{PlannerBudget, PlannerSettings, PLANNER_NAMES};
use hasp_core::roadmap::Roadmap;
use hasp_core::Configuration;

fn budget(attempts: usize) -> PlannerBudget {
    PlannerBudget {
        max_sample_attempts: attempts,
        time_limit_secs: 20.0,
        ..PlannerBudget::default()
    }
}

/// Both queries run along the diagonals, which is where the skeleton of an
/// empty square lies and so where skeleton-confined roadmaps have nodes.
fn empty_scenario() -> Scenario {
    let env = Environment::new(Aabb::new(0.0, 0.0, 10.0, 10.0), vec![], RobotModel::Point).unwrap();
    let queries = vec![
        (Configuration::point(1.0, 1.0), Configuration::point(9.0, 9.0)),
        (Configuration::point(9.0, 1.0), Configuration::point(1.5, 8.5)),
    ];
    Scenario::new("empty", env, queries, budget(1000), Some(0.05))
}

fn sealed_scenario() -> Scenario {
    let ring = vec![
        Polygon::rectangle(7.0, 7.0, 9.0, 7.2).unwrap(),
        Polygon::rectangle(7.0, 8.8, 9.0, 9.0).unwrap(),
        Polygon::rectangle(7.0, 7.2, 7.2, 8.8).unwrap(),
        Polygon::rectangle(8.8, 7.2, 9.0, 8.8).unwrap(),
    ];
    let env = Environment::new(Aabb::new(0.0, 0.0, 10.0, 10.0), ring, RobotModel::Point).unwrap();
    let queries = vec![(Configuration::point(1.0, 1.0), Configuration::point(8.0, 8.0))];
    Scenario::new("sealed", env, queries, budget(300), Some(0.05))
}

#[test]
fn empty_space_paths_are_nearly_straight() {
    let sc = empty_scenario();
    for planner in PLANNER_NAMES {
        let out = run_trial(&sc, planner, 3, &PlannerSettings::default()).unwrap();
        for (q, (s, g)) in out.stats.queries.iter().zip(&sc.queries) {
            let straight = s.position().distance(g.position());
            let cost = q
                .path_cost
                .unwrap_or_else(|| panic!("{planner} query {} unsolved", q.index));
            assert!(cost >= straight - 1e-9, "{planner}");
            assert!(
                cost <= 1.05 * straight,
                "{planner} query {}: {cost} vs {straight}",
                q.index
            );
        }
    }
}

#[test]
fn sealed_goal_is_reported_unsolved() {
    let sc = sealed_scenario();
    for planner in PLANNER_NAMES {
        let out = run_trial(&sc, planner, 1, &PlannerSettings::default()).unwrap();
        assert!(
            out.stats.queries.iter().all(|q| !q.solved && q.error.is_some()),
            "{planner}"
        );
        assert!(out.paths.iter().all(Option::is_none));
    }
}

#[test]
fn trials_repeat_exactly_apart_from_times() {
    let sc = make_rhombus();
    for planner in PLANNER_NAMES {
        let a = run_trial(&sc, planner, 8, &PlannerSettings::default()).unwrap();
        let b = run_trial(&sc, planner, 8, &PlannerSettings::default()).unwrap();
        assert_eq!(a.stats.without_times(), b.stats.without_times(), "{planner}");
        assert_eq!(a.paths, b.paths, "{planner}");
    }
}

#[test]
fn counts_match_the_serialized_roadmap() {
    let sc = make_store(12);
    for planner in PLANNER_NAMES {
        let out = run_trial(&sc, planner, 2, &PlannerSettings::default()).unwrap();
        let back = Roadmap::from_json_str(&out.roadmap.to_json_string()).unwrap();
        assert_eq!(out.stats.nodes, back.live_node_count(), "{planner}");
        assert_eq!(out.stats.edges, back.live_edge_count(), "{planner}");
        assert!(out.stats.sample_attempts <= out.stats.sample_limit, "{planner}");
    }
}

#[test]
fn scenario_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for sc in all_fixtures() {
        sc.skeleton().unwrap();
        let path = sc.save(dir.path()).unwrap();
        let back = Scenario::load(&path).unwrap();
        assert_eq!(back.name, sc.name);
        assert_eq!(back.queries, sc.queries);
        assert_eq!(back.budget, sc.budget);
        assert_eq!(back.resolution, sc.resolution);
        assert_eq!(back.env.to_json_string(), sc.env.to_json_string());
        assert_eq!(
            back.skeleton().unwrap().to_json_string(),
            sc.skeleton().unwrap().to_json_string()
        );
    }
}

#[test]
fn scenario_with_blocked_endpoint_fails_to_load() {
    let dir = tempfile::tempdir().unwrap();
    let env = Environment::new(
        Aabb::new(0.0, 0.0, 10.0, 10.0),
        vec![Polygon::rectangle(4.0, 4.0, 6.0, 6.0).unwrap()],
        RobotModel::Point,
    )
    .unwrap();
    let queries = vec![(Configuration::point(1.0, 1.0), Configuration::point(5.0, 5.0))];
    let path = Scenario::new("blocked", env, queries, budget(10), None)
        .save(dir.path())
        .unwrap();
    assert!(matches!(
        Scenario::load(&path),
        Err(ScenarioError::InvalidEndpoint { index: 0, .. })
    ));
    assert!(matches!(
        Scenario::load(&dir.path().join("missing.json")),
        Err(ScenarioError::Io { .. })
    ));
}

#[test]
fn fixture_names_resolve() {
    let base = Path::new(".");
    assert_eq!(resolve_scenario("store:7", base).unwrap().env.obstacles().len(), 7);
    assert_eq!(resolve_scenario("store", base).unwrap().env.obstacles().len(), 50);
    assert!(matches!(
        resolve_scenario("store:x", base),
        Err(ScenarioError::UnknownFixture(_))
    ));
}

fn config(planners: &[&str], seeds: &[u64]) -> SuiteConfig {
    SuiteConfig {
        scenarios: vec!["rhombus".into()],
        planners: planners.iter().map(|p| p.to_string()).collect(),
        seeds: seeds.to_vec(),
        repetitions: 1,
        settings: PlannerSettings::default(),
        budget: Some(budget(300)),
    }
}

/// CSV text with the time columns blanked.
fn without_time_columns(csv_text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let header = r.headers().unwrap().clone();
    let skip: Vec<usize> = TIME_COLUMNS
        .iter()
        .map(|c| header.iter().position(|h| h == *c).unwrap())
        .collect();
    r.records()
        .map(|rec| {
            rec.unwrap()
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    if skip.contains(&i) {
                        String::new()
                    } else {
                        f.to_string()
                    }
                })
                .collect()
        })
        .collect()
}

#[test]
fn suite_has_one_row_per_trial_query() {
    let sc = make_rhombus();
    let result = run_suite(&config(&["basic", "hasp"], &[0, 1, 2]), Path::new(".")).unwrap();
    assert_eq!(result.rows.len(), 2 * 3 * sc.queries.len());
    let trials: std::collections::BTreeSet<_> = result.rows.iter().map(|r| (r.planner.clone(), r.seed)).collect();
    assert_eq!(trials.len(), 6);
    assert_eq!(result.cells.len(), 2);
    assert!(result.cells.iter().all(|c| c.trials == 3 && c.failed_trials == 0));
    let csv_text = result.to_csv().unwrap();
    assert!(csv_text.starts_with("scenario,planner,seed,repetition,query,"));
    let order: Vec<_> = result
        .rows
        .iter()
        .map(|r| (r.planner.as_str(), r.seed, r.query))
        .collect();
    assert_eq!(order[0], ("basic", 0, Some(0)));
    assert_eq!(order.last().unwrap().0, "hasp");
}

#[test]
fn unknown_planner_becomes_an_error_row() {
    let result = run_suite(&config(&["rrt", "basic"], &[4]), Path::new(".")).unwrap();
    let bad: Vec<_> = result.rows.iter().filter(|r| r.planner == "rrt").collect();
    assert_eq!(bad.len(), 1);
    assert!(bad[0].query.is_none() && !bad[0].solved);
    assert!(bad[0].error.as_deref().unwrap().contains("rrt"));
    assert!(result.rows.iter().any(|r| r.planner == "basic" && r.solved));
    let cell = result.cells.iter().find(|c| c.planner == "rrt").unwrap();
    assert_eq!((cell.trials, cell.failed_trials, cell.queries), (1, 1, 0));
}

#[test]
fn rerun_gives_the_same_table() {
    let cfg = config(&["lazy", "drprm"], &[5, 6]);
    let a = run_suite(&cfg, Path::new(".")).unwrap().to_csv().unwrap();
    let b = run_suite(&cfg, Path::new(".")).unwrap().to_csv().unwrap();
    assert_eq!(without_time_columns(&a), without_time_columns(&b));
}

#[test]
fn suite_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(&["basic"], &[0, 1]);
    cfg.repetitions = 2;
    let result = run_suite(&cfg, Path::new(".")).unwrap();
    let (csv_path, json_path) = result.write(&dir.path().join("out")).unwrap();
    let rows = without_time_columns(&std::fs::read_to_string(csv_path).unwrap());
    assert_eq!(rows.len(), result.rows.len());
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
    let cell = &summary["rhombus/basic"];
    assert_eq!(cell["trials"], 4);
    let nodes = &cell["nodes"];
    assert!(nodes["min"].as_f64().unwrap() <= nodes["mean"].as_f64().unwrap());
    assert!(nodes["mean"].as_f64().unwrap() <= nodes["max"].as_f64().unwrap());
}

#[test]
fn config_parses_with_defaults() {
    let cfg: SuiteConfig = serde_json::from_str(r#"{"scenarios":["create"],"planners":["hasp"],"seeds":[1]}"#).unwrap();
    assert_eq!(cfg.repetitions, 1);
    assert_eq!(cfg.settings, PlannerSettings::default());
    assert!(cfg.budget.is_none());
    assert!(serde_json::from_str::<SuiteConfig>(r#"{"scenarios":[],"planners":[],"seeds":[],"extra":1}"#).is_err());
}
