//! One planner run over a scenario's query list.

use std::time::{Duration, Instant};

use hasp_core::geometry::CdSnapshot;
use hasp_core::planners::{make_planner, PlanError, PlannerSettings};
use hasp_core::query::{evaluate_path, Path};
use hasp_core::roadmap::Roadmap;
use serde::{Deserialize, Serialize};

use crate::scenario::{Scenario, ScenarioError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryStats {
    pub index: usize,
    pub solved: bool,
    pub solve_time: f64,
    pub path_cost: Option<f64>,
    pub min_clearance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub scenario: String,
    pub planner: String,
    pub seed: u64,
    pub build_time: f64,
    pub queries: Vec<QueryStats>,
    pub cd_calls: CdSnapshot,
    /// Nodes not marked invalid in the final roadmap.
    pub nodes: usize,
    /// Edges neither invalid nor unfixable, between live nodes.
    pub edges: usize,
    pub sample_attempts: usize,
    pub sample_limit: usize,
}

impl RunStats {
    pub fn all_solved(&self) -> bool {
        self.queries.iter().all(|q| q.solved)
    }

    /// Copy with every wall-clock field zeroed, for determinism checks.
    pub fn without_times(&self) -> RunStats {
        let mut r = self.clone();
        r.build_time = 0.0;
        for q in &mut r.queries {
            q.solve_time = 0.0;
        }
        r
    }
}

/// Everything a run produced, for post-hoc checks.
#[derive(Debug)]
pub struct TrialOutcome {
    pub stats: RunStats,
    pub paths: Vec<Option<Path>>,
    pub roadmap: Roadmap,
}

/// Run `planner` on `scenario` with `seed`. The roadmap persists across the
/// queries. The skeleton is preprocessing: built beforehand and neither timed
/// nor counted. Planner failures become unsolved queries.
pub fn run_trial(
    scenario: &Scenario,
    planner: &str,
    seed: u64,
    settings: &PlannerSettings,
) -> Result<TrialOutcome, TrialError> {
    let env = std::sync::Arc::new(scenario.env.with_fresh_counter());
    let skeleton = match planner {
        "hasp" | "drprm" => Some(scenario.skeleton()?),
        _ => None,
    };
    let mut settings = *settings;
    if settings.resolution.is_none() {
        settings.resolution = scenario.resolution;
    }
    let resolution = settings.resolution.unwrap_or_else(|| env.default_resolution());
    let before = env.cd_snapshot();
    let mut p = make_planner(planner, env.clone(), skeleton, scenario.budget, settings, seed)?;
    let t0 = Instant::now();
    p.build()?;
    let build_time = t0.elapsed().as_secs_f64();
    let limit = Duration::from_secs_f64(scenario.budget.time_limit_secs);
    let mut queries = Vec::new();
    let mut paths = Vec::new();
    for (index, (s, g)) in scenario.queries.iter().enumerate() {
        let t = Instant::now();
        let result = p.solve(*s, *g, t + limit);
        let solve_time = t.elapsed().as_secs_f64();
        match result {
            Ok(mut path) => {
                let (cost, clearance) = evaluate_path(&env, p.roadmap(), &path, resolution);
                path.min_clearance = Some(clearance);
                queries.push(QueryStats {
                    index,
                    solved: true,
                    solve_time,
                    path_cost: Some(cost),
                    min_clearance: Some(clearance),
                    error: None,
                });
                paths.push(Some(path));
            }
            Err(e) => {
                queries.push(QueryStats {
                    index,
                    solved: false,
                    solve_time,
                    path_cost: None,
                    min_clearance: None,
                    error: Some(e.to_string()),
                });
                paths.push(None);
            }
        }
    }
    let cd_calls = env.cd_snapshot() - before;
    let roadmap = p.roadmap().clone();
    let stats = RunStats {
        scenario: scenario.name.clone(),
        planner: p.name().to_string(),
        seed,
        build_time,
        queries,
        cd_calls,
        nodes: roadmap.live_node_count(),
        edges: roadmap.live_edge_count(),
        sample_attempts: p.sample_attempts(),
        sample_limit: p.sample_limit(),
    };
    Ok(TrialOutcome { stats, paths, roadmap })
}

#[derive(Debug, thiserror::Error)]
pub enum TrialError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Planner(#[from] PlanError),
}
