use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use super::path_set::{update_path_set, FixOrder, PathRecord, PathSet};
use super::{Core, PlanError, Planner, PlannerBudget};
use crate::geometry::{Environment, ValidityMode};
use crate::ids::{EdgeId, NodeId, SkelEdgeId};
use crate::query::{EdgeFilter, KShortestPaths, Path, SearchGraph};
use crate::roadmap::{
    init_local_components, lazy_connect_components, AdvanceOutcome, ConnectMode, EdgeExpansion, EdgeStatus,
    ExpansionSettings, Roadmap, SampleBudget, Side,
};
use crate::skeleton::{AcceptanceCriteria, AnnotatedSkeleton};
use crate::Configuration;

#[derive(Clone, Debug, PartialEq)]
pub enum BuildOutcome {
    /// A fully valid path; the path set holds only it.
    Found(Path),
    /// Candidates were recorded but none is valid.
    Partial,
    /// No start-goal path over valid and unvalidated edges.
    NoCandidate,
}

/// Enumerate candidates in ascending lower-bound cost, validating their
/// unvalidated edges, until a valid one appears or the path set fills.
pub fn build_path_set(
    rm: &mut Roadmap,
    env: &Environment,
    s: NodeId,
    g: NodeId,
    budget: &PlannerBudget,
    resolution: f64,
    path_set: &mut PathSet,
) -> BuildOutcome {
    if s == g {
        path_set.clear();
        return BuildOutcome::Found(Path::singleton(s));
    }
    let mut stream = KShortestPaths::over(SearchGraph::new(rm, EdgeFilter::NON_INVALID), s, g).peekable();
    // the cost limit is anchored on the cheapest candidate
    let Some(best) = stream.peek() else {
        return BuildOutcome::NoCandidate;
    };
    let max_cost = budget.epsilon * best.total_cost;
    let mut p_cost = 0.0;
    while path_set.len() < budget.max_paths && p_cost < max_cost {
        let Some(p) = stream.next() else {
            break;
        };
        p_cost = p.total_cost;
        if path_set.contains_nodes(&p.nodes) {
            continue;
        }
        for &e in &p.edges {
            if rm.edge(e).status == EdgeStatus::Unvalidated {
                rm.validate_edge(env, e, resolution);
            }
        }
        let record = PathRecord::new(rm, &p);
        if record.is_fully_valid() {
            path_set.clear();
            path_set.insert(record);
            return BuildOutcome::Found(p);
        }
        path_set.insert(record);
    }
    BuildOutcome::Partial
}

/// Everything a repair touches.
pub struct RepairScope<'a> {
    pub rm: &'a mut Roadmap,
    pub env: &'a Environment,
    pub sk: &'a AnnotatedSkeleton,
    pub rng: &'a mut ChaCha8Rng,
    pub budget: &'a mut SampleBudget,
    pub settings: ExpansionSettings,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FixReport {
    pub fixed: bool,
    pub unfixable: BTreeSet<EdgeId>,
}

/// Edge repair by region expansion along the source skeleton edge. Keeps one
/// expansion per skeleton edge across calls.
#[derive(Clone, Debug)]
pub struct Repairer {
    pub order: FixOrder,
    pub rounds: usize,
    expansions: HashMap<SkelEdgeId, EdgeExpansion>,
    resolved: BTreeSet<EdgeId>,
    /// Every edge handed to `fix_edge`, in call order.
    pub fix_log: Vec<EdgeId>,
}

impl Repairer {
    pub fn new(order: FixOrder, rounds: usize) -> Self {
        Self {
            order,
            rounds,
            expansions: HashMap::new(),
            resolved: BTreeSet::new(),
            fix_log: Vec::new(),
        }
    }

    pub fn is_resolved(&self, e: EdgeId) -> bool {
        self.resolved.contains(&e)
    }

    /// Repair every invalid edge of `record` in the configured order. Failed
    /// edges become unfixable. Edges repaired earlier are skipped.
    pub fn fix_path(&mut self, record: &PathRecord, scope: &mut RepairScope) -> Result<FixReport, PlanError> {
        if record.invalid_edges.is_empty() {
            return Err(PlanError::Precondition(
                "fix_path on a record without invalid edges".into(),
            ));
        }
        let mut edges: Vec<EdgeId> = record.invalid_edges.iter().copied().collect();
        self.order.arrange(scope.rm, &mut edges);
        let mut report = FixReport::default();
        for e in edges {
            let ok = match scope.rm.edge(e).status {
                EdgeStatus::Unfixable => false,
                EdgeStatus::Invalid if self.resolved.contains(&e) => true,
                _ => self.fix_edge(e, scope)?,
            };
            if !ok {
                if scope.rm.edge(e).status == EdgeStatus::Invalid {
                    scope
                        .rm
                        .set_status(e, EdgeStatus::Unfixable)
                        .map_err(|err| PlanError::Precondition(err.to_string()))?;
                }
                report.unfixable.insert(e);
            }
        }
        report.fixed = report.unfixable.is_empty();
        Ok(report)
    }

    /// Grow the local components at both ends of `e`'s skeleton edge toward
    /// each other until a validated connection joins them.
    pub fn fix_edge(&mut self, e: EdgeId, scope: &mut RepairScope) -> Result<bool, PlanError> {
        let edge = scope.rm.edge(e).clone();
        if edge.status != EdgeStatus::Invalid || self.resolved.contains(&e) {
            return Err(PlanError::Precondition(format!(
                "fix_edge on {e} with status {}",
                edge.status
            )));
        }
        self.resolved.insert(e);
        self.fix_log.push(e);
        let Some(se) = edge.source_skeleton_edge else {
            return Ok(false);
        };
        let (a, b) = if scope.rm.node(edge.u).source_vertex == Some(scope.sk.edge(se).u) {
            (edge.u, edge.v)
        } else {
            (edge.v, edge.u)
        };
        if scope.rm.same_component(a, b) {
            return Ok(true);
        }
        let exp = self
            .expansions
            .entry(se)
            .or_insert_with(|| EdgeExpansion::new(scope.sk, se, Some(a), Some(b)));
        let m = scope.sk.edge(se).intermediates.len();
        let step = (m.saturating_sub(1)).div_ceil(2 * self.rounds.max(1)).max(1);
        let res = scope.settings.resolution;
        for _ in 0..self.rounds {
            for side in [Side::U, Side::V] {
                let outcome = exp.advance(
                    side,
                    step,
                    scope.rm,
                    scope.env,
                    scope.sk,
                    &scope.settings,
                    scope.rng,
                    scope.budget,
                );
                if outcome == AdvanceOutcome::Met || scope.rm.same_component(a, b) {
                    return Ok(true);
                }
                if exp.try_bridge(scope.rm, scope.env, res).is_some() || scope.rm.same_component(a, b) {
                    return Ok(true);
                }
            }
            if exp.all_blocked() || scope.budget.exhausted() {
                return Ok(false);
            }
        }
        Ok(false)
    }
}

/// Skeleton-guided lazy planner: local components at accepted skeleton
/// vertices, lazy edges along accepted skeleton edges, and repair of invalid
/// edges by expanding regions along their skeleton edge.
pub struct Hasp {
    core: Core,
    sk: Arc<AnnotatedSkeleton>,
    repairer: Repairer,
    path_set: PathSet,
    expansion: ExpansionSettings,
}

impl Hasp {
    pub fn new(core: Core, sk: Arc<AnnotatedSkeleton>) -> Self {
        let expansion = ExpansionSettings::for_env(
            &core.env,
            core.settings.k,
            core.settings.samples_per_iteration,
            core.resolution(),
        );
        Self {
            repairer: Repairer::new(core.settings.fix_order, core.settings.fix_rounds),
            core,
            sk,
            path_set: PathSet::new(),
            expansion,
        }
    }

    pub fn repairer(&self) -> &Repairer {
        &self.repairer
    }

    pub fn path_set(&self) -> &PathSet {
        &self.path_set
    }

    fn policy(&self) -> AcceptanceCriteria {
        AcceptanceCriteria::for_robot(self.core.env.robot(), self.core.settings.safety_factor)
    }

    /// Fall back to plain lazy sampling: a few uniform valid nodes joined to
    /// their neighbours without checks. False once the budget is spent.
    fn relax(&mut self) -> bool {
        let k = self.core.settings.k;
        let res = self.core.resolution();
        for _ in 0..self.core.settings.samples_per_iteration {
            match self.core.sample_uniform(Some(ValidityMode::Full)) {
                None => return false,
                Some(None) => {}
                Some(Some(q)) => {
                    let n = self.core.rm.add_node(q, None);
                    self.core
                        .rm
                        .connect_neighbors(&self.core.env, n, k, ConnectMode::Lazy, res);
                }
            }
        }
        true
    }

    fn repair_round(&mut self, deadline: Instant) -> Result<(), PlanError> {
        let Core {
            env, rm, rng, attempts, ..
        } = &mut self.core;
        let mut scope = RepairScope {
            rm,
            env,
            sk: &self.sk,
            rng,
            budget: attempts,
            settings: self.expansion,
        };
        while let Some(record) = self.path_set.pop_front() {
            if Instant::now() >= deadline {
                return Err(PlanError::Timeout);
            }
            if record.edges.iter().any(|e| self.repairer.is_resolved(*e)) || !record.is_current(scope.rm) {
                continue;
            }
            let report = self.repairer.fix_path(&record, &mut scope)?;
            if report.fixed {
                return Ok(());
            }
            update_path_set(&mut self.path_set, &report.unfixable);
        }
        Ok(())
    }
}

impl Planner for Hasp {
    fn name(&self) -> &'static str {
        "hasp"
    }

    fn build(&mut self) -> Result<(), PlanError> {
        let policy = self.policy();
        let Core {
            env,
            rm,
            rng,
            attempts,
            settings,
            ..
        } = &mut self.core;
        let comps = init_local_components(
            rm,
            env,
            &self.sk,
            &policy,
            settings.samples_per_iteration,
            &self.expansion,
            rng,
            attempts,
        );
        lazy_connect_components(rm, &self.sk, &policy, &comps);
        Ok(())
    }

    fn solve(&mut self, s: Configuration, g: Configuration, deadline: Instant) -> Result<Path, PlanError> {
        self.core.begin_query();
        let s = self.core.attach(s, ConnectMode::Validated)?;
        let g = self.core.attach(g, ConnectMode::Validated)?;
        self.path_set.clear();
        let res = self.core.resolution();
        loop {
            self.core.check_deadline(deadline)?;
            let resolved = &self.repairer;
            let rm = &self.core.rm;
            self.path_set
                .retain(|r| r.is_current(rm) && !r.edges.iter().any(|e| resolved.is_resolved(*e)));
            match build_path_set(
                &mut self.core.rm,
                &self.core.env,
                s,
                g,
                &self.core.budget,
                res,
                &mut self.path_set,
            ) {
                BuildOutcome::Found(p) => return Ok(p),
                BuildOutcome::NoCandidate => {
                    if !self.relax() {
                        let rm = &self.core.rm;
                        return Err(if rm.neighbors(s).is_empty() || rm.neighbors(g).is_empty() {
                            PlanError::Disconnected
                        } else {
                            PlanError::BudgetExhausted
                        });
                    }
                }
                BuildOutcome::Partial => self.repair_round(deadline)?,
            }
        }
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
