//! Scenarios: an environment, an optional precomputed skeleton, a query list
//! and a budget, loadable from JSON files.

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use hasp_core::geometry::{Environment, GeometryError};
use hasp_core::planners::PlannerBudget;
use hasp_core::skeleton::{build_annotated, default_grid_resolution, AnnotatedSkeleton, SkeletonError};
use hasp_core::Configuration;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("environment: {0}")]
    Geometry(#[from] GeometryError),
    #[error("skeleton: {0}")]
    Skeleton(#[from] SkeletonError),
    #[error("scenario {0:?} has no queries")]
    NoQueries(String),
    #[error("query {index} of scenario {name:?} has an invalid endpoint")]
    InvalidEndpoint { name: String, index: usize },
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
}

#[derive(Debug)]
pub struct Scenario {
    pub name: String,
    pub env: Arc<Environment>,
    pub queries: Vec<(Configuration, Configuration)>,
    pub budget: PlannerBudget,
    /// Edge-check resolution; the environment default when absent.
    pub resolution: Option<f64>,
    skeleton: OnceLock<Arc<AnnotatedSkeleton>>,
}

/// On-disk form. Paths are relative to the scenario file.
#[derive(Debug, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    pub environment: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skeleton: Option<PathBuf>,
    pub queries: Vec<[Configuration; 2]>,
    #[serde(default)]
    pub budget: PlannerBudget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), ScenarioError> {
    std::fs::write(path, text).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse a JSON query list: `[[start, goal], ...]` with `[x, y, theta]` poses.
pub fn load_queries(path: &Path) -> Result<Vec<(Configuration, Configuration)>, ScenarioError> {
    let pairs: Vec<[Configuration; 2]> = serde_json::from_str(&read(path)?).map_err(|source| ScenarioError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(pairs.into_iter().map(|[s, g]| (s, g)).collect())
}

impl Scenario {
    pub fn new(
        name: &str,
        env: Environment,
        queries: Vec<(Configuration, Configuration)>,
        budget: PlannerBudget,
        resolution: Option<f64>,
    ) -> Self {
        Self {
            name: name.to_string(),
            env: Arc::new(env),
            queries,
            budget,
            resolution,
            skeleton: OnceLock::new(),
        }
    }

    pub fn with_skeleton(self, sk: AnnotatedSkeleton) -> Self {
        let _ = self.skeleton.set(Arc::new(sk));
        self
    }

    /// At least one query and every endpoint fully valid. Uses an uncounted
    /// environment copy.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.queries.is_empty() {
            return Err(ScenarioError::NoQueries(self.name.clone()));
        }
        let probe = self.env.with_fresh_counter();
        for (index, (s, g)) in self.queries.iter().enumerate() {
            if !probe.is_valid_full(s) || !probe.is_valid_full(g) {
                return Err(ScenarioError::InvalidEndpoint {
                    name: self.name.clone(),
                    index,
                });
            }
        }
        Ok(())
    }

    /// The loaded skeleton, or one built on first use at the default grid
    /// resolution. Building uses a separate counter.
    pub fn skeleton(&self) -> Result<Arc<AnnotatedSkeleton>, ScenarioError> {
        if let Some(sk) = self.skeleton.get() {
            return Ok(sk.clone());
        }
        let probe = self.env.with_fresh_counter();
        let sk = Arc::new(build_annotated(&probe, default_grid_resolution(&probe))?);
        Ok(self.skeleton.get_or_init(|| sk).clone())
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(&read(path)?).map_err(|source| ScenarioError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let env = Environment::from_json_str(&read(&dir.join(&file.environment))?)?;
        let queries = file.queries.into_iter().map(|[s, g]| (s, g)).collect();
        let mut sc = Scenario::new(&file.name, env, queries, file.budget, file.resolution);
        if let Some(sk) = file.skeleton {
            sc = sc.with_skeleton(AnnotatedSkeleton::from_json_str(&read(&dir.join(sk))?)?);
        }
        sc.validate()?;
        Ok(sc)
    }

    /// Write `<name>.scenario.json` and `<name>.env.json` into `dir`, plus
    /// `<name>.skeleton.json` when a skeleton is present.
    pub fn save(&self, dir: &Path) -> Result<PathBuf, ScenarioError> {
        let env_name = PathBuf::from(format!("{}.env.json", self.name));
        write(&dir.join(&env_name), &self.env.to_json_string())?;
        let skeleton = match self.skeleton.get() {
            Some(sk) => {
                let p = PathBuf::from(format!("{}.skeleton.json", self.name));
                write(&dir.join(&p), &sk.to_json_string())?;
                Some(p)
            }
            None => None,
        };
        let file = ScenarioFile {
            name: self.name.clone(),
            environment: env_name,
            skeleton,
            queries: self.queries.iter().map(|&(s, g)| [s, g]).collect(),
            budget: self.budget,
            resolution: self.resolution,
        };
        let path = dir.join(format!("{}.scenario.json", self.name));
        write(
            &path,
            &serde_json::to_string_pretty(&file).expect("scenario serialises"),
        )?;
        Ok(path)
    }
}
