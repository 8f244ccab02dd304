//! Graph search over partially validated roadmaps: shortest path, loopless
//! k-shortest paths in ascending cost, and path evaluation.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::geometry::Environment;
use crate::ids::{EdgeId, NodeId};
use crate::roadmap::{EdgeStatus, NodeCheck, Roadmap};

/// Which edge statuses a search may traverse. Nodes marked invalid are
/// always excluded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeFilter {
    pub unvalidated: bool,
    pub valid: bool,
    pub invalid: bool,
    pub unfixable: bool,
}

impl EdgeFilter {
    pub const VALID_ONLY: EdgeFilter = EdgeFilter {
        unvalidated: false,
        valid: true,
        invalid: false,
        unfixable: false,
    };
    /// Valid and unvalidated edges.
    pub const NON_INVALID: EdgeFilter = EdgeFilter {
        unvalidated: true,
        valid: true,
        invalid: false,
        unfixable: false,
    };

    pub fn allows(&self, s: EdgeStatus) -> bool {
        match s {
            EdgeStatus::Unvalidated => self.unvalidated,
            EdgeStatus::Valid => self.valid,
            EdgeStatus::Invalid => self.invalid,
            EdgeStatus::Unfixable => self.unfixable,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub total_cost: f64,
    pub min_clearance: Option<f64>,
}

impl Path {
    pub fn singleton(n: NodeId) -> Self {
        Self {
            nodes: vec![n],
            edges: Vec::new(),
            total_cost: 0.0,
            min_clearance: None,
        }
    }

    /// Path along `nodes`, looking up the connecting edges.
    pub fn from_nodes(rm: &Roadmap, nodes: Vec<NodeId>) -> Option<Self> {
        let edges = nodes
            .windows(2)
            .map(|w| rm.find_edge(w[0], w[1]))
            .collect::<Option<Vec<_>>>()?;
        let total_cost = sum_costs(edges.iter().map(|e| rm.edge(*e).cost));
        Some(Self {
            nodes,
            edges,
            total_cost,
            min_clearance: None,
        })
    }
}

/// Sum in path order; every cost comparison in this module goes through it.
fn sum_costs(costs: impl Iterator<Item = f64>) -> f64 {
    costs.fold(0.0, |acc, c| acc + c)
}

/// Immutable adjacency snapshot of the edges passing a filter.
#[derive(Clone, Debug)]
pub struct SearchGraph {
    adj: Vec<Vec<(EdgeId, usize, f64)>>,
    cost: Vec<f64>,
}

impl SearchGraph {
    pub fn new(rm: &Roadmap, filter: EdgeFilter) -> Self {
        let n = rm.node_count();
        let mut adj = vec![Vec::new(); n];
        let cost: Vec<f64> = rm.edges().iter().map(|e| e.cost).collect();
        let node_ok = |id: NodeId| rm.node(id).check != NodeCheck::Invalid;
        for e in rm.edges() {
            if filter.allows(e.status) && node_ok(e.u) && node_ok(e.v) {
                adj[e.u.0].push((e.id, e.v.0, e.cost));
                adj[e.v.0].push((e.id, e.u.0, e.cost));
            }
        }
        for list in &mut adj {
            list.sort_by_key(|&(e, w, _)| (w, e));
        }
        Self { adj, cost }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn path_from(&self, nodes: Vec<usize>, edges: Vec<EdgeId>) -> Path {
        Path {
            total_cost: sum_costs(edges.iter().map(|e| self.cost[e.0])),
            nodes: nodes.into_iter().map(NodeId).collect(),
            edges,
            min_clearance: None,
        }
    }

    /// Dijkstra with (distance, node id) heap order; predecessors change only
    /// on strict improvement, making ties resolve deterministically.
    fn dijkstra(&self, s: usize, g: usize, banned_nodes: &[bool], banned_edges: &HashSet<EdgeId>) -> Option<Path> {
        if s >= self.adj.len() || g >= self.adj.len() || banned_nodes[s] || banned_nodes[g] {
            return None;
        }
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev: Vec<Option<(usize, EdgeId)>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push(Reverse((Cost(0.0), s)));
        while let Some(Reverse((Cost(d), v))) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            if v == g {
                break;
            }
            for &(e, w, c) in &self.adj[v] {
                if done[w] || banned_nodes[w] || banned_edges.contains(&e) {
                    continue;
                }
                let nd = d + c;
                if nd < dist[w] {
                    dist[w] = nd;
                    prev[w] = Some((v, e));
                    heap.push(Reverse((Cost(nd), w)));
                }
            }
        }
        if !done[g] {
            return None;
        }
        let mut nodes = vec![g];
        let mut edges = Vec::new();
        let mut v = g;
        while let Some((p, e)) = prev[v] {
            nodes.push(p);
            edges.push(e);
            v = p;
        }
        nodes.reverse();
        edges.reverse();
        Some(self.path_from(nodes, edges))
    }

    pub fn shortest_path(&self, s: NodeId, g: NodeId) -> Option<Path> {
        self.dijkstra(s.0, g.0, &vec![false; self.adj.len()], &HashSet::new())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub fn shortest_path(rm: &Roadmap, s: NodeId, g: NodeId, filter: EdgeFilter) -> Option<Path> {
    SearchGraph::new(rm, filter).shortest_path(s, g)
}

/// Candidate ordered by (cost, node sequence).
#[derive(Clone, Debug)]
struct Candidate(Path);

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cost
            .total_cmp(&other.0.total_cost)
            .then_with(|| self.0.nodes.cmp(&other.0.nodes))
    }
}

/// Yen's loopless k-shortest paths as a lazy stream over a snapshot.
pub struct KShortestPaths {
    graph: SearchGraph,
    s: NodeId,
    g: NodeId,
    found: Vec<Path>,
    seen: HashSet<Vec<NodeId>>,
    candidates: BTreeSet<Candidate>,
    started: bool,
}

impl KShortestPaths {
    pub fn new(rm: &Roadmap, s: NodeId, g: NodeId, filter: EdgeFilter) -> Self {
        Self::over(SearchGraph::new(rm, filter), s, g)
    }

    pub fn over(graph: SearchGraph, s: NodeId, g: NodeId) -> Self {
        Self {
            graph,
            s,
            g,
            found: Vec::new(),
            seen: HashSet::new(),
            candidates: BTreeSet::new(),
            started: false,
        }
    }

    fn push_candidate(&mut self, p: Path) {
        if self.seen.insert(p.nodes.clone()) {
            self.candidates.insert(Candidate(p));
        }
    }

    fn spur_from_last(&mut self) {
        let last = self.found.last().expect("called after a path was found").clone();
        let n = self.graph.node_count();
        for i in 0..last.nodes.len().saturating_sub(1) {
            let root_nodes = &last.nodes[..=i];
            let mut banned_edges = HashSet::new();
            for p in &self.found {
                if p.nodes.len() > i + 1 && p.nodes[..=i] == *root_nodes {
                    banned_edges.insert(p.edges[i]);
                }
            }
            let mut banned_nodes = vec![false; n];
            for r in &root_nodes[..i] {
                banned_nodes[r.0] = true;
            }
            let Some(spur) = self
                .graph
                .dijkstra(root_nodes[i].0, self.g.0, &banned_nodes, &banned_edges)
            else {
                continue;
            };
            let mut nodes: Vec<usize> = root_nodes.iter().map(|n| n.0).collect();
            nodes.extend(spur.nodes[1..].iter().map(|n| n.0));
            let mut edges = last.edges[..i].to_vec();
            edges.extend(spur.edges);
            let cand = self.graph.path_from(nodes, edges);
            self.push_candidate(cand);
        }
    }
}

impl Iterator for KShortestPaths {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        if !self.started {
            self.started = true;
            let first = self.graph.shortest_path(self.s, self.g)?;
            self.seen.insert(first.nodes.clone());
            self.found.push(first.clone());
            return Some(first);
        }
        if self.found.is_empty() {
            return None;
        }
        self.spur_from_last();
        let best = self.candidates.pop_first()?.0;
        self.found.push(best.clone());
        Some(best)
    }
}

/// At most `k` loopless paths in non-decreasing cost.
pub fn k_shortest_paths(
    rm: &Roadmap,
    s: NodeId,
    g: NodeId,
    k: usize,
    filter: EdgeFilter,
) -> impl Iterator<Item = Path> {
    KShortestPaths::new(rm, s, g, filter).take(k)
}

/// Total cost and minimum workspace clearance along the path, sampled at
/// `resolution`. Uses its own counter so callers' tallies are unaffected.
pub fn evaluate_path(env: &Environment, rm: &Roadmap, path: &Path, resolution: f64) -> (f64, f64) {
    let probe = env.with_fresh_counter();
    let total = sum_costs(path.edges.iter().map(|e| rm.edge(*e).cost));
    let mut min_c = probe.clearance(rm.node(path.nodes[0]).config.position());
    for w in path.nodes.windows(2) {
        let (a, b) = (rm.node(w[0]).config, rm.node(w[1]).config);
        let steps = (a.position().distance(b.position()) / resolution).ceil().max(1.0) as usize;
        for i in 1..=steps {
            let p = a.interpolate(&b, i as f64 / steps as f64).position();
            min_c = min_c.min(probe.clearance(p));
        }
    }
    (total, min_c)
}
