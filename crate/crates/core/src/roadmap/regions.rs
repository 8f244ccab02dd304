use std::collections::BTreeMap;

use rand::Rng;

use super::sampling::{random_config, SampleArea, SampleBudget, SamplingRegion};
use super::{EdgeStatus, Roadmap};
use crate::geometry::{Environment, ValidityMode};
use crate::ids::{EdgeId, NodeId, SkelEdgeId, VertexId};
use crate::skeleton::{default_grid_resolution, AcceptanceCriteria, AnnotatedSkeleton};

/// Consecutive failed samples before a region gives up.
pub const FAILURE_BUDGET: usize = 20;

/// Nodes sampled around each accepted skeleton vertex.
pub type LocalComponents = BTreeMap<VertexId, Vec<NodeId>>;

/// Three bounding radii, but never below two skeleton grid cells.
pub fn region_radius(env: &Environment) -> f64 {
    (3.0 * env.robot().bounding_radius()).max(2.0 * default_grid_resolution(env))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionSettings {
    pub radius: f64,
    pub k: usize,
    pub samples_per_iteration: usize,
    pub resolution: f64,
    pub failure_budget: usize,
}

impl ExpansionSettings {
    pub fn for_env(env: &Environment, k: usize, samples_per_iteration: usize, resolution: f64) -> Self {
        Self {
            radius: region_radius(env),
            k,
            samples_per_iteration,
            resolution,
            failure_budget: FAILURE_BUDGET,
        }
    }
}

/// Samples `samples_per_vertex` valid nodes around every accepted skeleton
/// vertex and links each group with validated edges.
#[allow(clippy::too_many_arguments)]
pub fn init_local_components<R: Rng + ?Sized>(
    rm: &mut Roadmap,
    env: &Environment,
    sk: &AnnotatedSkeleton,
    policy: &AcceptanceCriteria,
    samples_per_vertex: usize,
    settings: &ExpansionSettings,
    rng: &mut R,
    budget: &mut SampleBudget,
) -> LocalComponents {
    let mut out = LocalComponents::new();
    for v in sk.vertices() {
        if !policy.accepts(v.annotation) {
            continue;
        }
        let area = SampleArea::Disc {
            center: v.position,
            radius: settings.radius,
        };
        let mut members = Vec::new();
        let mut fails = 0;
        while members.len() < samples_per_vertex && fails < settings.failure_budget && budget.take(1) == 1 {
            let q = random_config(env, rng, area);
            if !env.is_valid_full(&q) {
                fails += 1;
                continue;
            }
            fails = 0;
            let n = rm.add_node(q, Some(v.id));
            let vid = v.id;
            rm.connect_neighbors_filtered(
                env,
                n,
                settings.k,
                super::ConnectMode::Validated,
                settings.resolution,
                |m| m.source_vertex == Some(vid),
            );
            members.push(n);
        }
        if !members.is_empty() {
            out.insert(v.id, members);
        }
    }
    out
}

/// One unvalidated edge per accepted skeleton edge, between the closest pair
/// of nodes from the two endpoint components.
pub fn lazy_connect_components(
    rm: &mut Roadmap,
    sk: &AnnotatedSkeleton,
    policy: &AcceptanceCriteria,
    components: &LocalComponents,
) -> Vec<EdgeId> {
    let mut out = Vec::new();
    for e in sk.edges() {
        if !policy.accepts(e.weight) {
            continue;
        }
        let (Some(cu), Some(cv)) = (components.get(&e.u), components.get(&e.v)) else {
            continue;
        };
        if let Some((a, b)) = rm.closest_pair(cu, cv) {
            out.extend(rm.add_edge(a, b, EdgeStatus::Unvalidated, Some(e.id)));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    U,
    V,
}

impl Side {
    fn slot(self) -> usize {
        match self {
            Side::U => 0,
            Side::V => 1,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::U => Side::V,
            Side::V => Side::U,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdvanceOutcome {
    Advanced,
    Blocked,
    Met,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SideState {
    /// Intermediates counted from this side's endpoint.
    pub index: usize,
    /// Any node of the trailing component.
    pub anchor: Option<NodeId>,
    pub blocked: bool,
    pub advances: usize,
}

/// A pair of sampling regions growing toward each other along one skeleton
/// edge. Kept between calls so repeated repairs resume where they stopped.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeExpansion {
    pub edge: SkelEdgeId,
    len: usize,
    sides: [SideState; 2],
    met: bool,
}

impl EdgeExpansion {
    pub fn new(sk: &AnnotatedSkeleton, edge: SkelEdgeId, anchor_u: Option<NodeId>, anchor_v: Option<NodeId>) -> Self {
        let side = |anchor| SideState {
            index: 0,
            anchor,
            blocked: false,
            advances: 0,
        };
        Self {
            edge,
            len: sk.edge(edge).intermediates.len(),
            sides: [side(anchor_u), side(anchor_v)],
            met: false,
        }
    }

    pub fn side(&self, s: Side) -> &SideState {
        &self.sides[s.slot()]
    }

    pub fn set_anchor(&mut self, s: Side, anchor: NodeId) {
        self.sides[s.slot()].anchor = Some(anchor);
    }

    pub fn is_met(&self) -> bool {
        self.met
    }

    pub fn all_blocked(&self) -> bool {
        self.sides.iter().all(|s| s.blocked)
    }

    /// The regions have reached or passed each other.
    pub fn indices_touch(&self) -> bool {
        self.sides[0].index + self.sides[1].index + 1 >= self.len
    }

    pub fn region(&self, sk: &AnnotatedSkeleton, s: Side, radius: f64) -> SamplingRegion {
        SamplingRegion::on_edge(sk, self.edge, s == Side::U, self.side(s).index, radius)
    }

    fn anchors_joined(&self, rm: &Roadmap) -> bool {
        match (self.sides[0].anchor, self.sides[1].anchor) {
            (Some(a), Some(b)) => rm.same_component(a, b),
            _ => false,
        }
    }

    /// Move one region `step` intermediates forward and grow its trailing
    /// component there with fully validated samples.
    #[allow(clippy::too_many_arguments)]
    pub fn advance<R: Rng + ?Sized>(
        &mut self,
        s: Side,
        step: usize,
        rm: &mut Roadmap,
        env: &Environment,
        sk: &AnnotatedSkeleton,
        settings: &ExpansionSettings,
        rng: &mut R,
        budget: &mut SampleBudget,
    ) -> AdvanceOutcome {
        if self.met || self.anchors_joined(rm) {
            self.met = true;
            return AdvanceOutcome::Met;
        }
        let state = self.sides[s.slot()];
        let Some(anchor) = state.anchor else {
            self.sides[s.slot()].blocked = true;
            return AdvanceOutcome::Blocked;
        };
        if state.blocked {
            return AdvanceOutcome::Blocked;
        }
        let index = (state.index + step).min(self.len - 1);
        let region = SamplingRegion::on_edge(sk, self.edge, s == Side::U, index, settings.radius);
        let tag = if s == Side::U {
            sk.edge(self.edge).u
        } else {
            sk.edge(self.edge).v
        };
        let mut members = rm.component_members(anchor);
        let mut added = 0;
        let mut fails = 0;
        while added < settings.samples_per_iteration && fails < settings.failure_budget {
            if budget.take(1) == 0 {
                break;
            }
            let q = random_config(env, rng, SampleArea::from(&region));
            if !env.is_valid(&q, ValidityMode::Full) {
                fails += 1;
                continue;
            }
            let near = nearest_of(rm, &q, &members, settings.k);
            let good: Vec<NodeId> = near
                .into_iter()
                .filter(|m| env.edge_valid(&q, &rm.node(*m).config, settings.resolution, ValidityMode::Full))
                .collect();
            if good.is_empty() {
                fails += 1;
                continue;
            }
            fails = 0;
            let n = rm.add_node(q, Some(tag));
            for m in good {
                rm.add_edge(n, m, EdgeStatus::Valid, Some(self.edge));
            }
            members.push(n);
            added += 1;
        }
        let st = &mut self.sides[s.slot()];
        st.advances += 1;
        if added == 0 {
            st.blocked = true;
            return AdvanceOutcome::Blocked;
        }
        st.index = index;
        if self.anchors_joined(rm) || (self.indices_touch() && self.try_bridge(rm, env, settings.resolution).is_some())
        {
            self.met = true;
            return AdvanceOutcome::Met;
        }
        AdvanceOutcome::Advanced
    }

    /// Draw a lazy edge between the closest pair of the two trailing
    /// components and validate it. Returns the edge when it is valid.
    pub fn try_bridge(&mut self, rm: &mut Roadmap, env: &Environment, resolution: f64) -> Option<EdgeId> {
        let (Some(a), Some(b)) = (self.sides[0].anchor, self.sides[1].anchor) else {
            return None;
        };
        if rm.same_component(a, b) {
            self.met = true;
            return None;
        }
        let (x, y) = rm.closest_pair(&rm.component_members(a), &rm.component_members(b))?;
        let e = rm.add_edge(x, y, EdgeStatus::Unvalidated, Some(self.edge))?;
        if rm.validate_edge(env, e, resolution) {
            self.met = true;
            Some(e)
        } else {
            None
        }
    }
}

fn nearest_of(rm: &Roadmap, q: &crate::Configuration, members: &[NodeId], k: usize) -> Vec<NodeId> {
    let mut c: Vec<(f64, NodeId)> = members
        .iter()
        .map(|&m| (rm.distance(q, &rm.node(m).config), m))
        .collect();
    c.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    c.truncate(k);
    c.into_iter().map(|(_, m)| m).collect()
}
