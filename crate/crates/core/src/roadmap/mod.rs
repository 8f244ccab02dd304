//! C-space roadmap with tri-state edge validation, union-find over validated
//! edges, sampling, and the region machinery shared by skeleton-guided planners.

mod regions;
mod sampling;

pub use regions::{
    init_local_components, lazy_connect_components, region_radius, AdvanceOutcome, EdgeExpansion, ExpansionSettings,
    LocalComponents, Side, SideState, FAILURE_BUDGET,
};
pub use sampling::{random_config, sample_in_region, SampleArea, SampleBudget, SamplingRegion};

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Environment, ValidityMode};
use crate::ids::{EdgeId, NodeId, SkelEdgeId, VertexId};
use crate::Configuration;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStatus {
    Unvalidated,
    Valid,
    Invalid,
    Unfixable,
}

impl EdgeStatus {
    pub fn can_become(self, next: EdgeStatus) -> bool {
        use EdgeStatus::*;
        matches!(
            (self, next),
            (Unvalidated, Valid) | (Unvalidated, Invalid) | (Invalid, Unfixable)
        )
    }

    /// Neither invalid nor unfixable.
    pub fn is_live(self) -> bool {
        matches!(self, EdgeStatus::Unvalidated | EdgeStatus::Valid)
    }
}

impl fmt::Display for EdgeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EdgeStatus::Unvalidated => "unvalidated",
            EdgeStatus::Valid => "valid",
            EdgeStatus::Invalid => "invalid",
            EdgeStatus::Unfixable => "unfixable",
        };
        f.write_str(s)
    }
}

/// Node validation state. Only the lazy baselines insert nodes that are not
/// fully checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeCheck {
    Unchecked,
    Partial,
    Valid,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadmapNode {
    pub id: NodeId,
    pub config: Configuration,
    pub source_vertex: Option<VertexId>,
    pub check: NodeCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadmapEdge {
    pub id: EdgeId,
    pub u: NodeId,
    pub v: NodeId,
    pub status: EdgeStatus,
    pub cost: f64,
    pub source_skeleton_edge: Option<SkelEdgeId>,
    /// Passed a partial-mode check while still unvalidated.
    #[serde(default)]
    pub partial_checked: bool,
}

impl RoadmapEdge {
    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub edge: EdgeId,
    pub from: EdgeStatus,
    pub to: EdgeStatus,
}

#[derive(Debug, Error)]
pub enum RoadmapError {
    #[error("edge {edge}: transition {from} -> {to} is not allowed")]
    ForbiddenTransition {
        edge: EdgeId,
        from: EdgeStatus,
        to: EdgeStatus,
    },
    #[error("roadmap file is inconsistent: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Union-find with union by size; `find` does not compress so it works
/// through a shared reference.
#[derive(Clone, Debug, Default)]
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn push(&mut self) {
        self.parent.push(self.parent.len());
        self.size.push(1);
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
    }
}

/// How new edges from [`Roadmap::connect_neighbors`] are checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectMode {
    /// Full check; only valid edges are inserted.
    Validated,
    /// No check; edges enter as unvalidated.
    Lazy,
    /// Partial check; passing edges enter as unvalidated with `partial_checked`.
    Partial,
}

#[derive(Clone, Debug, Default)]
pub struct Roadmap {
    nodes: Vec<RoadmapNode>,
    edges: Vec<RoadmapEdge>,
    adjacency: Vec<Vec<(EdgeId, NodeId)>>,
    pairs: HashMap<(NodeId, NodeId), EdgeId>,
    components: UnionFind,
    transitions: Vec<Transition>,
    rotation_weight: f64,
}

fn pair_key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Roadmap {
    pub fn new(env: &Environment) -> Self {
        Self::with_rotation_weight(env.rotation_weight())
    }

    pub fn with_rotation_weight(rotation_weight: f64) -> Self {
        Self {
            rotation_weight,
            ..Default::default()
        }
    }

    pub fn nodes(&self) -> &[RoadmapNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RoadmapEdge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &RoadmapNode {
        &self.nodes[id.0]
    }

    pub fn edge(&self, id: EdgeId) -> &RoadmapEdge {
        &self.edges[id.0]
    }

    pub fn neighbors(&self, n: NodeId) -> &[(EdgeId, NodeId)] {
        &self.adjacency[n.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Every status change so far, in order.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn distance(&self, a: &Configuration, b: &Configuration) -> f64 {
        a.distance(b, self.rotation_weight)
    }

    /// Insert a node that has passed a full validity check.
    pub fn add_node(&mut self, config: Configuration, source_vertex: Option<VertexId>) -> NodeId {
        self.add_node_checked(config, source_vertex, NodeCheck::Valid)
    }

    pub fn add_node_checked(
        &mut self,
        config: Configuration,
        source_vertex: Option<VertexId>,
        check: NodeCheck,
    ) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(RoadmapNode {
            id,
            config,
            source_vertex,
            check,
        });
        self.adjacency.push(Vec::new());
        self.components.push();
        id
    }

    pub fn set_node_check(&mut self, id: NodeId, check: NodeCheck) {
        self.nodes[id.0].check = check;
    }

    pub fn find_edge(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.pairs.get(&pair_key(a, b)).copied()
    }

    /// Adds an edge unless it would be a self-loop or duplicate a pair.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, status: EdgeStatus, source: Option<SkelEdgeId>) -> Option<EdgeId> {
        if u == v || self.pairs.contains_key(&pair_key(u, v)) {
            return None;
        }
        let id = EdgeId(self.edges.len());
        let cost = self.distance(&self.nodes[u.0].config, &self.nodes[v.0].config);
        self.edges.push(RoadmapEdge {
            id,
            u,
            v,
            status,
            cost,
            source_skeleton_edge: source,
            partial_checked: false,
        });
        self.adjacency[u.0].push((id, v));
        self.adjacency[v.0].push((id, u));
        self.pairs.insert(pair_key(u, v), id);
        if status == EdgeStatus::Valid {
            self.components.union(u.0, v.0);
        }
        Some(id)
    }

    pub fn mark_partial_checked(&mut self, e: EdgeId) {
        self.edges[e.0].partial_checked = true;
    }

    pub fn set_status(&mut self, e: EdgeId, to: EdgeStatus) -> Result<(), RoadmapError> {
        let from = self.edges[e.0].status;
        if !from.can_become(to) {
            return Err(RoadmapError::ForbiddenTransition { edge: e, from, to });
        }
        log::trace!("edge {e}: {from} -> {to}");
        self.transitions.push(Transition { edge: e, from, to });
        self.edges[e.0].status = to;
        if to == EdgeStatus::Valid {
            let (u, v) = (self.edges[e.0].u, self.edges[e.0].v);
            self.components.union(u.0, v.0);
        }
        Ok(())
    }

    /// Fully checks an unvalidated edge and records the outcome. Already
    /// resolved edges are returned as-is without any collision query.
    pub fn validate_edge(&mut self, env: &Environment, e: EdgeId, resolution: f64) -> bool {
        match self.edges[e.0].status {
            EdgeStatus::Valid => true,
            EdgeStatus::Invalid | EdgeStatus::Unfixable => false,
            EdgeStatus::Unvalidated => {
                let edge = &self.edges[e.0];
                let ok = env.edge_valid(
                    &self.nodes[edge.u.0].config,
                    &self.nodes[edge.v.0].config,
                    resolution,
                    ValidityMode::Full,
                );
                let to = if ok { EdgeStatus::Valid } else { EdgeStatus::Invalid };
                self.set_status(e, to).expect("unvalidated edges can always resolve");
                ok
            }
        }
    }

    /// Component label over the valid-edge subgraph.
    pub fn component(&self, n: NodeId) -> usize {
        self.components.find(n.0)
    }

    pub fn same_component(&self, a: NodeId, b: NodeId) -> bool {
        self.component(a) == self.component(b)
    }

    pub fn component_members(&self, n: NodeId) -> Vec<NodeId> {
        let c = self.component(n);
        (0..self.nodes.len())
            .filter(|&i| self.components.find(i) == c)
            .map(NodeId)
            .collect()
    }

    /// Labels recomputed from scratch by traversal of valid edges, as
    /// canonical minimum member id per node.
    pub fn rebuild_components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.nodes.len()];
        for s in 0..self.nodes.len() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = s;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &(e, w) in &self.adjacency[x] {
                    if self.edges[e.0].status == EdgeStatus::Valid && label[w.0] == usize::MAX {
                        label[w.0] = s;
                        stack.push(w.0);
                    }
                }
            }
        }
        label
    }

    /// Up to `k` nearest eligible nodes, ordered by (distance, id).
    pub fn k_nearest(&self, q: &Configuration, k: usize, eligible: impl Fn(&RoadmapNode) -> bool) -> Vec<NodeId> {
        let mut cand: Vec<(f64, NodeId)> = self
            .nodes
            .iter()
            .filter(|n| eligible(n))
            .map(|n| (self.distance(q, &n.config), n.id))
            .collect();
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        cand.truncate(k);
        cand.into_iter().map(|(_, id)| id).collect()
    }

    /// Connect `node` to its `k` nearest non-invalid neighbours.
    pub fn connect_neighbors(
        &mut self,
        env: &Environment,
        node: NodeId,
        k: usize,
        mode: ConnectMode,
        resolution: f64,
    ) -> Vec<EdgeId> {
        self.connect_neighbors_filtered(env, node, k, mode, resolution, |_| true)
    }

    pub fn connect_neighbors_filtered(
        &mut self,
        env: &Environment,
        node: NodeId,
        k: usize,
        mode: ConnectMode,
        resolution: f64,
        eligible: impl Fn(&RoadmapNode) -> bool,
    ) -> Vec<EdgeId> {
        let q = self.nodes[node.0].config;
        let near = self.k_nearest(&q, k, |n| n.id != node && n.check != NodeCheck::Invalid && eligible(n));
        let mut out = Vec::new();
        for m in near {
            if self.find_edge(node, m).is_some() {
                continue;
            }
            let qm = self.nodes[m.0].config;
            let added = match mode {
                ConnectMode::Validated => {
                    if env.edge_valid(&q, &qm, resolution, ValidityMode::Full) {
                        self.add_edge(node, m, EdgeStatus::Valid, None)
                    } else {
                        None
                    }
                }
                ConnectMode::Lazy => self.add_edge(node, m, EdgeStatus::Unvalidated, None),
                ConnectMode::Partial => {
                    if env.edge_valid(&q, &qm, resolution, ValidityMode::Partial) {
                        let e = self.add_edge(node, m, EdgeStatus::Unvalidated, None);
                        if let Some(e) = e {
                            self.mark_partial_checked(e);
                        }
                        e
                    } else {
                        None
                    }
                }
            };
            out.extend(added);
        }
        out
    }

    /// Closest pair `(a, b)` with `a` from `left` and `b` from `right`, ties by ids.
    pub fn closest_pair(&self, left: &[NodeId], right: &[NodeId]) -> Option<(NodeId, NodeId)> {
        let mut best: Option<(f64, NodeId, NodeId)> = None;
        for &a in left {
            for &b in right {
                if a == b {
                    continue;
                }
                let d = self.distance(&self.nodes[a.0].config, &self.nodes[b.0].config);
                let better = match best {
                    None => true,
                    Some((bd, ba, bb)) => d.total_cmp(&bd).then(a.cmp(&ba)).then(b.cmp(&bb)).is_lt(),
                };
                if better {
                    best = Some((d, a, b));
                }
            }
        }
        best.map(|(_, a, b)| (a, b))
    }

    /// Nodes not marked invalid.
    pub fn live_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.check != NodeCheck::Invalid).count()
    }

    /// Edges whose status is live and whose endpoints are not invalid.
    pub fn live_edge_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| {
                e.status.is_live()
                    && self.nodes[e.u.0].check != NodeCheck::Invalid
                    && self.nodes[e.v.0].check != NodeCheck::Invalid
            })
            .count()
    }

    pub fn count_status(&self, status: EdgeStatus) -> usize {
        self.edges.iter().filter(|e| e.status == status).count()
    }

    pub fn to_json_string(&self) -> String {
        let file = RoadmapFile {
            rotation_weight: self.rotation_weight,
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&file).expect("roadmap serialises")
    }

    pub fn from_json_str(s: &str) -> Result<Self, RoadmapError> {
        let file: RoadmapFile = serde_json::from_str(s)?;
        let mut rm = Roadmap::with_rotation_weight(file.rotation_weight);
        for (i, n) in file.nodes.into_iter().enumerate() {
            if n.id.0 != i {
                return Err(RoadmapError::Corrupt(format!("node {i} has id {}", n.id)));
            }
            rm.add_node_checked(n.config, n.source_vertex, n.check);
        }
        for (i, e) in file.edges.into_iter().enumerate() {
            if e.id.0 != i || e.u.0 >= rm.nodes.len() || e.v.0 >= rm.nodes.len() {
                return Err(RoadmapError::Corrupt(format!("edge {i} is malformed")));
            }
            let id = rm
                .add_edge(e.u, e.v, e.status, e.source_skeleton_edge)
                .ok_or_else(|| RoadmapError::Corrupt(format!("edge {i} duplicates a pair")))?;
            rm.edges[id.0].cost = e.cost;
            rm.edges[id.0].partial_checked = e.partial_checked;
        }
        Ok(rm)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RoadmapError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RoadmapError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct RoadmapFile {
    #[serde(default)]
    rotation_weight: f64,
    nodes: Vec<RoadmapNode>,
    edges: Vec<RoadmapEdge>,
}
