use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ids::{EdgeId, NodeId};
use crate::query::Path;
use crate::roadmap::{EdgeStatus, Roadmap};

/// Order in which a path's invalid edges are repaired.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixOrder {
    /// Longest edge first.
    #[default]
    Descending,
    Ascending,
}

impl FixOrder {
    /// Sort `edges` by cost in this order, ties by id.
    pub fn arrange(self, rm: &Roadmap, edges: &mut [EdgeId]) {
        edges.sort_by(|a, b| {
            let (ca, cb) = (rm.edge(*a).cost, rm.edge(*b).cost);
            let by_cost = match self {
                FixOrder::Descending => cb.total_cmp(&ca),
                FixOrder::Ascending => ca.total_cmp(&cb),
            };
            by_cost.then(a.cmp(b))
        });
    }
}

/// A candidate path with its edges split by status at recording time.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub valid_edges: BTreeSet<EdgeId>,
    pub invalid_edges: BTreeSet<EdgeId>,
    pub unvalidated_edges: BTreeSet<EdgeId>,
    /// Cost if every edge were valid.
    pub lower_bound_cost: f64,
}

impl PathRecord {
    /// Record `path` against the current edge statuses. Unfixable edges count
    /// as invalid.
    pub fn new(rm: &Roadmap, path: &Path) -> Self {
        let mut r = Self {
            nodes: path.nodes.clone(),
            edges: path.edges.clone(),
            valid_edges: BTreeSet::new(),
            invalid_edges: BTreeSet::new(),
            unvalidated_edges: BTreeSet::new(),
            lower_bound_cost: path.total_cost,
        };
        for &e in &path.edges {
            match rm.edge(e).status {
                EdgeStatus::Valid => r.valid_edges.insert(e),
                EdgeStatus::Unvalidated => r.unvalidated_edges.insert(e),
                EdgeStatus::Invalid | EdgeStatus::Unfixable => r.invalid_edges.insert(e),
            };
        }
        r
    }

    pub fn is_fully_valid(&self) -> bool {
        self.invalid_edges.is_empty() && self.unvalidated_edges.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.valid_edges.contains(&e) || self.invalid_edges.contains(&e) || self.unvalidated_edges.contains(&e)
    }

    /// True when every edge still has the status it was recorded with.
    pub fn is_current(&self, rm: &Roadmap) -> bool {
        self.edges.iter().all(|&e| match rm.edge(e).status {
            EdgeStatus::Valid => self.valid_edges.contains(&e),
            EdgeStatus::Unvalidated => self.unvalidated_edges.contains(&e),
            EdgeStatus::Invalid => self.invalid_edges.contains(&e),
            EdgeStatus::Unfixable => false,
        })
    }

    pub fn to_path(&self) -> Path {
        Path {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            total_cost: self.lower_bound_cost,
            min_clearance: None,
        }
    }
}

/// Records ordered by lower-bound cost, then fewer invalid edges, then
/// insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathSet {
    records: Vec<(u64, PathRecord)>,
    next_seq: u64,
}

impl PathSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn clear(&mut self) {
        self.records.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = &PathRecord> {
        self.records.iter().map(|(_, r)| r)
    }

    pub fn contains_nodes(&self, nodes: &[NodeId]) -> bool {
        self.iter().any(|r| r.nodes == nodes)
    }

    pub fn insert(&mut self, record: PathRecord) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let key = |r: &PathRecord, s: u64| (r.lower_bound_cost, r.invalid_edges.len(), s);
        let k = key(&record, seq);
        let pos = self.records.partition_point(|(s, r)| {
            let o = key(r, *s);
            o.0.total_cmp(&k.0).then(o.1.cmp(&k.1)).then(o.2.cmp(&k.2)).is_lt()
        });
        self.records.insert(pos, (seq, record));
    }

    pub fn pop_front(&mut self) -> Option<PathRecord> {
        if self.records.is_empty() {
            None
        } else {
            Some(self.records.remove(0).1)
        }
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&PathRecord) -> bool) {
        self.records.retain(|(_, r)| keep(r));
    }

    /// Check the ordering invariant.
    pub fn is_ordered(&self) -> bool {
        self.records.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            (a.1.lower_bound_cost, a.1.invalid_edges.len(), a.0) <= (b.1.lower_bound_cost, b.1.invalid_edges.len(), b.0)
        })
    }
}

/// Drop every record that contains one of `unfixable`.
pub fn update_path_set(path_set: &mut PathSet, unfixable: &BTreeSet<EdgeId>) {
    if unfixable.is_empty() {
        return;
    }
    path_set.retain(|r| !unfixable.iter().any(|e| r.contains(*e)));
}
