//! Cross-product benchmark runs: scenarios × planners × seeds × repetitions,
//! written as one CSV row per query plus JSON aggregates per cell.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hasp_core::planners::{PlannerBudget, PlannerSettings};
use serde::{Deserialize, Serialize};

use crate::fixtures::{make_create, make_rhombus, make_store};
use crate::scenario::{Scenario, ScenarioError};
use crate::trial::{run_trial, RunStats};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Fixture names (`create`, `rhombus`, `store` or `store:N`) or scenario
    /// file paths, relative to the config file.
    pub scenarios: Vec<String>,
    pub planners: Vec<String>,
    pub seeds: Vec<u64>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub settings: PlannerSettings,
    /// Replaces every scenario's own budget when present.
    #[serde(default)]
    pub budget: Option<PlannerBudget>,
}

fn one() -> usize {
    1
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("config lists no {0}")]
    Empty(&'static str),
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self, SuiteError> {
        let text = fs::read_to_string(path).map_err(|source| SuiteError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| SuiteError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    fn check(&self) -> Result<(), SuiteError> {
        if self.scenarios.is_empty() {
            return Err(SuiteError::Empty("scenarios"));
        }
        if self.planners.is_empty() {
            return Err(SuiteError::Empty("planners"));
        }
        if self.seeds.is_empty() {
            return Err(SuiteError::Empty("seeds"));
        }
        if self.repetitions == 0 {
            return Err(SuiteError::Empty("repetitions"));
        }
        Ok(())
    }
}

/// A fixture by name, or a scenario file below `base`.
pub fn resolve_scenario(name: &str, base: &Path) -> Result<Scenario, ScenarioError> {
    match name {
        "create" => Ok(make_create()),
        "rhombus" => Ok(make_rhombus()),
        "store" => Ok(make_store(50)),
        _ => {
            if let Some(n) = name.strip_prefix("store:") {
                return n
                    .parse()
                    .map(make_store)
                    .map_err(|_| ScenarioError::UnknownFixture(name.to_string()));
            }
            Scenario::load(&base.join(name))
        }
    }
}

/// One CSV line: a query of a trial, or a trial that failed outright.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub scenario: String,
    pub planner: String,
    pub seed: u64,
    pub repetition: usize,
    pub query: Option<usize>,
    pub solved: bool,
    pub solve_time: Option<f64>,
    pub path_cost: Option<f64>,
    pub min_clearance: Option<f64>,
    pub build_time: Option<f64>,
    pub full_cd_calls: Option<u64>,
    pub partial_cd_calls: Option<u64>,
    pub clearance_calls: Option<u64>,
    pub nodes: Option<usize>,
    pub edges: Option<usize>,
    pub sample_attempts: Option<usize>,
    pub error: Option<String>,
}

/// Columns holding wall-clock measurements.
pub const TIME_COLUMNS: [&str; 2] = ["solve_time", "build_time"];

impl SuiteRow {
    fn from_stats(stats: &RunStats, repetition: usize) -> Vec<SuiteRow> {
        stats
            .queries
            .iter()
            .map(|q| SuiteRow {
                scenario: stats.scenario.clone(),
                planner: stats.planner.clone(),
                seed: stats.seed,
                repetition,
                query: Some(q.index),
                solved: q.solved,
                solve_time: Some(q.solve_time),
                path_cost: q.path_cost,
                min_clearance: q.min_clearance,
                build_time: Some(stats.build_time),
                full_cd_calls: Some(stats.cd_calls.full_cd_calls),
                partial_cd_calls: Some(stats.cd_calls.partial_cd_calls),
                clearance_calls: Some(stats.cd_calls.clearance_calls),
                nodes: Some(stats.nodes),
                edges: Some(stats.edges),
                sample_attempts: Some(stats.sample_attempts),
                error: q.error.clone(),
            })
            .collect()
    }

    fn failed(scenario: &str, planner: &str, seed: u64, repetition: usize, error: String) -> SuiteRow {
        SuiteRow {
            scenario: scenario.to_string(),
            planner: planner.to_string(),
            seed,
            repetition,
            query: None,
            solved: false,
            solve_time: None,
            path_cost: None,
            min_clearance: None,
            build_time: None,
            full_cd_calls: None,
            partial_cd_calls: None,
            clearance_calls: None,
            nodes: None,
            edges: None,
            sample_attempts: None,
            error: Some(error),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Stat> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        Some(Stat {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Aggregates over every trial of one (scenario, planner) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scenario: String,
    pub planner: String,
    pub trials: usize,
    pub failed_trials: usize,
    pub queries: usize,
    pub solved: usize,
    pub build_time: Option<Stat>,
    pub cd_calls: Option<Stat>,
    pub nodes: Option<Stat>,
    pub edges: Option<Stat>,
    pub solve_time: Option<Stat>,
    pub path_cost: Option<Stat>,
    pub min_clearance: Option<Stat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub rows: Vec<SuiteRow>,
    pub cells: Vec<CellSummary>,
}

/// Run the full cross product in config order. Scenario load errors abort;
/// trial errors become rows.
pub fn run_suite(config: &SuiteConfig, base: &Path) -> Result<SuiteResult, SuiteError> {
    config.check()?;
    let mut scenarios = Vec::new();
    for name in &config.scenarios {
        let mut sc = resolve_scenario(name, base)?;
        if let Some(b) = config.budget {
            sc.budget = b;
        }
        scenarios.push(sc);
    }
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for sc in &scenarios {
        for planner in &config.planners {
            let mut trials = Vec::new();
            let mut failed = 0;
            for &seed in &config.seeds {
                for rep in 0..config.repetitions {
                    match run_trial(sc, planner, seed, &config.settings) {
                        Ok(out) => {
                            rows.extend(SuiteRow::from_stats(&out.stats, rep));
                            trials.push(out.stats);
                        }
                        Err(e) => {
                            failed += 1;
                            rows.push(SuiteRow::failed(&sc.name, planner, seed, rep, e.to_string()));
                        }
                    }
                }
            }
            cells.push(summarize(&sc.name, planner, &trials, failed));
        }
    }
    Ok(SuiteResult { rows, cells })
}

fn summarize(scenario: &str, planner: &str, trials: &[RunStats], failed: usize) -> CellSummary {
    let queries = || trials.iter().flat_map(|t| &t.queries);
    CellSummary {
        scenario: scenario.to_string(),
        planner: planner.to_string(),
        trials: trials.len() + failed,
        failed_trials: failed,
        queries: queries().count(),
        solved: queries().filter(|q| q.solved).count(),
        build_time: Stat::of(trials.iter().map(|t| t.build_time)),
        cd_calls: Stat::of(trials.iter().map(|t| t.cd_calls.total() as f64)),
        nodes: Stat::of(trials.iter().map(|t| t.nodes as f64)),
        edges: Stat::of(trials.iter().map(|t| t.edges as f64)),
        solve_time: Stat::of(queries().filter(|q| q.solved).map(|q| q.solve_time)),
        path_cost: Stat::of(queries().filter_map(|q| q.path_cost)),
        min_clearance: Stat::of(queries().filter_map(|q| q.min_clearance)),
    }
}

impl SuiteResult {
    pub fn to_csv(&self) -> Result<String, SuiteError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn summary_json(&self) -> String {
        let by_cell: BTreeMap<String, &CellSummary> = self
            .cells
            .iter()
            .map(|c| (format!("{}/{}", c.scenario, c.planner), c))
            .collect();
        serde_json::to_string_pretty(&by_cell).expect("summary serialises")
    }

    /// Write `results.csv` and `summary.json` into `dir`, creating it.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), SuiteError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| SuiteError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let csv_path = dir.join("results.csv");
        fs::write(&csv_path, self.to_csv()?).map_err(io(&csv_path))?;
        let json_path = dir.join("summary.json");
        fs::write(&json_path, self.summary_json()).map_err(io(&json_path))?;
        Ok((csv_path, json_path))
    }
}
