//! The skeleton-guided lazy planner and five baseline roadmap planners, all
//! behind [`Planner`].

mod basic;
mod drprm;
mod hasp;
mod lazy;
mod maprm;
mod partial;
mod path_set;

pub use basic::BasicPrm;
pub use drprm::DrPrm;
pub use hasp::{build_path_set, BuildOutcome, FixReport, Hasp, RepairScope, Repairer};
pub use lazy::LazyPrm;
pub use maprm::{retract_to_medial_axis, MaPrm, RETRACTION_TOLERANCE};
pub use partial::PartialLazyPrm;
pub use path_set::{update_path_set, FixOrder, PathRecord, PathSet};

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Environment, ValidityMode};
use crate::ids::NodeId;
use crate::query::{shortest_path, EdgeFilter, Path};
use crate::roadmap::{random_config, region_radius, ConnectMode, NodeCheck, Roadmap, SampleArea, SampleBudget};
use crate::skeleton::AnnotatedSkeleton;
use crate::Configuration;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("sampling budget exhausted without a valid path")]
    BudgetExhausted,
    #[error("start or goal could not be attached to the roadmap")]
    Disconnected,
    #[error("query timed out")]
    Timeout,
    #[error("query endpoint is not a valid configuration")]
    InvalidEndpoint,
    #[error("planner needs a skeleton")]
    MissingSkeleton,
    #[error("unknown planner {0:?}")]
    UnknownPlanner(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("bad budget: {0}")]
    BadBudget(String),
}

/// Limits shared by every planner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerBudget {
    /// Sampling attempts for the initial roadmap.
    pub max_sample_attempts: usize,
    /// Candidates costing at least `epsilon` times the cheapest one end
    /// path-set construction; must exceed 1.
    pub epsilon: f64,
    /// Partially invalid paths collected before repairs start.
    pub max_paths: usize,
    /// Per-query wall-clock limit in seconds.
    pub time_limit_secs: f64,
}

impl Default for PlannerBudget {
    fn default() -> Self {
        Self {
            max_sample_attempts: 1000,
            epsilon: 2.0,
            max_paths: 5,
            time_limit_secs: 60.0,
        }
    }
}

impl PlannerBudget {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.epsilon.is_nan() || self.epsilon <= 1.0 {
            return Err(PlanError::BadBudget(format!("epsilon {} must exceed 1", self.epsilon)));
        }
        if self.max_paths == 0 {
            return Err(PlanError::BadBudget("max_paths must be at least 1".into()));
        }
        if self.time_limit_secs.is_nan() || self.time_limit_secs <= 0.0 {
            return Err(PlanError::BadBudget("time limit must be positive".into()));
        }
        Ok(())
    }
}

/// Tuning knobs beyond the budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerSettings {
    pub k: usize,
    pub samples_per_iteration: usize,
    /// Edge-check resolution; the environment default when absent.
    pub resolution: Option<f64>,
    /// Extra sampling attempts granted to each query, attachment included.
    pub query_attempts: usize,
    /// Attachment samples around an endpoint that fails to connect directly.
    pub attach_samples: usize,
    pub safety_factor: f64,
    pub fix_order: FixOrder,
    /// Advance rounds per side for one edge repair.
    pub fix_rounds: usize,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        Self {
            k: 8,
            samples_per_iteration: 2,
            resolution: None,
            query_attempts: 500,
            attach_samples: 50,
            safety_factor: 1.0,
            fix_order: FixOrder::Descending,
            fix_rounds: 10,
        }
    }
}

pub trait Planner {
    fn name(&self) -> &'static str;
    /// Construct the initial roadmap under the attempt budget.
    fn build(&mut self) -> Result<(), PlanError>;
    /// Answer one query on the persistent roadmap.
    fn solve(&mut self, s: Configuration, g: Configuration, deadline: Instant) -> Result<Path, PlanError>;
    fn roadmap(&self) -> &Roadmap;
    /// Sampling attempts consumed so far, across build and all queries.
    fn sample_attempts(&self) -> usize;
    /// Attempt limit so far: the build budget plus every query allowance granted.
    fn sample_limit(&self) -> usize;
}

pub const PLANNER_NAMES: [&str; 6] = ["hasp", "basic", "lazy", "partial", "drprm", "maprm"];

/// Planner by name. Skeleton-guided planners need `skeleton`.
pub fn make_planner(
    name: &str,
    env: Arc<Environment>,
    skeleton: Option<Arc<AnnotatedSkeleton>>,
    budget: PlannerBudget,
    settings: PlannerSettings,
    seed: u64,
) -> Result<Box<dyn Planner>, PlanError> {
    budget.validate()?;
    let core = Core::new(env, budget, settings, seed);
    let need = |sk: Option<Arc<AnnotatedSkeleton>>| sk.ok_or(PlanError::MissingSkeleton);
    Ok(match name {
        "hasp" => Box::new(Hasp::new(core, need(skeleton)?)),
        "basic" => Box::new(BasicPrm::new(core)),
        "lazy" => Box::new(LazyPrm::new(core)),
        "partial" => Box::new(PartialLazyPrm::new(core)),
        "drprm" => Box::new(DrPrm::new(core, need(skeleton)?)),
        "maprm" => Box::new(MaPrm::new(core)),
        other => return Err(PlanError::UnknownPlanner(other.to_string())),
    })
}

/// State every planner carries: environment, roadmap, RNG and budgets.
pub struct Core {
    pub env: Arc<Environment>,
    pub rm: Roadmap,
    pub rng: ChaCha8Rng,
    pub attempts: SampleBudget,
    pub budget: PlannerBudget,
    pub settings: PlannerSettings,
}

impl Core {
    pub fn new(env: Arc<Environment>, budget: PlannerBudget, settings: PlannerSettings, seed: u64) -> Self {
        Self {
            rm: Roadmap::new(&env),
            env,
            rng: ChaCha8Rng::seed_from_u64(seed),
            attempts: SampleBudget::new(budget.max_sample_attempts),
            budget,
            settings,
        }
    }

    pub fn resolution(&self) -> f64 {
        self.settings
            .resolution
            .unwrap_or_else(|| self.env.default_resolution())
    }

    /// Grant the per-query allowance.
    pub fn begin_query(&mut self) {
        self.attempts.extend(self.settings.query_attempts);
    }

    /// One uniform attempt: `Some` with the pose when it passes `mode`.
    pub fn sample_uniform(&mut self, mode: Option<ValidityMode>) -> Option<Option<Configuration>> {
        if self.attempts.take(1) == 0 {
            return None;
        }
        let q = random_config(&self.env, &mut self.rng, SampleArea::Boundary);
        Some(match mode {
            Some(m) => self.env.is_valid(&q, m).then_some(q),
            None => Some(q),
        })
    }

    /// Existing node sitting exactly at `q`.
    pub fn node_at(&self, q: &Configuration) -> Option<NodeId> {
        self.rm
            .nodes()
            .iter()
            .find(|n| n.config == *q && n.check != NodeCheck::Invalid)
            .map(|n| n.id)
    }

    /// Add a query endpoint and connect it with `mode`. When that yields no
    /// edge, grow a small validated patch around it from attachment samples.
    pub fn attach(&mut self, q: Configuration, mode: ConnectMode) -> Result<NodeId, PlanError> {
        if let Some(n) = self.node_at(&q) {
            return Ok(n);
        }
        if !self.env.is_valid_full(&q) {
            return Err(PlanError::InvalidEndpoint);
        }
        let res = self.resolution();
        let k = self.settings.k;
        let n = self.rm.add_node(q, None);
        if !self.rm.connect_neighbors(&self.env, n, k, mode, res).is_empty() || mode != ConnectMode::Validated {
            return Ok(n);
        }
        let area = SampleArea::Disc {
            center: q.position(),
            radius: region_radius(&self.env),
        };
        for _ in 0..self.settings.attach_samples {
            if self.attempts.take(1) == 0 {
                break;
            }
            let p = random_config(&self.env, &mut self.rng, area);
            if !self.env.is_valid_full(&p) || !self.env.edge_valid(&q, &p, res, ValidityMode::Full) {
                continue;
            }
            let m = self.rm.add_node(p, None);
            self.rm.connect_neighbors(&self.env, m, k, ConnectMode::Validated, res);
            if self.rm.neighbors(m).len() > 1 {
                break;
            }
        }
        Ok(n)
    }

    /// Endpoint result once the budget is spent.
    pub fn exhausted_error(&self, s: NodeId, g: NodeId) -> PlanError {
        if self.rm.neighbors(s).is_empty() || self.rm.neighbors(g).is_empty() {
            PlanError::Disconnected
        } else {
            PlanError::BudgetExhausted
        }
    }

    /// Attach both endpoints with validated edges, then alternate a
    /// valid-edge search with `grow` until they share a component. `grow`
    /// returns false once it can no longer sample.
    pub fn standard_query(
        &mut self,
        s: Configuration,
        g: Configuration,
        deadline: Instant,
        mut grow: impl FnMut(&mut Core) -> bool,
    ) -> Result<Path, PlanError> {
        self.begin_query();
        let s = self.attach(s, ConnectMode::Validated)?;
        let g = self.attach(g, ConnectMode::Validated)?;
        loop {
            self.check_deadline(deadline)?;
            if self.rm.same_component(s, g) {
                return shortest_path(&self.rm, s, g, EdgeFilter::VALID_ONLY)
                    .ok_or_else(|| PlanError::Precondition("component without a valid path".into()));
            }
            if !grow(self) {
                return Err(self.exhausted_error(s, g));
            }
        }
    }

    /// `samples_per_iteration` uniform attempts; each valid pose, passed
    /// through `place`, joins with validated edges. False once out of budget.
    pub fn grow_uniform(&mut self, place: impl Fn(&Environment, Configuration) -> Configuration) -> bool {
        let k = self.settings.k;
        let res = self.resolution();
        for _ in 0..self.settings.samples_per_iteration {
            match self.sample_uniform(Some(ValidityMode::Full)) {
                None => return false,
                Some(None) => {}
                Some(Some(q)) => {
                    let q = place(&self.env, q);
                    let n = self.rm.add_node(q, None);
                    self.rm.connect_neighbors(&self.env, n, k, ConnectMode::Validated, res);
                }
            }
        }
        true
    }

    pub fn check_deadline(&self, deadline: Instant) -> Result<(), PlanError> {
        if Instant::now() >= deadline {
            Err(PlanError::Timeout)
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests;
