//! Graph extraction from a thinned raster skeleton.

use std::collections::{BTreeMap, VecDeque};

use super::grid::{neighbour_count, FeatureTransform, Grid, RING};

/// Skeleton graph over raw cell indices, before conversion to workspace points.
#[derive(Debug, Default)]
pub(crate) struct CellGraph {
    pub vertices: Vec<Option<usize>>,
    pub edges: Vec<Option<CellEdge>>,
}

#[derive(Clone, Debug)]
pub(crate) struct CellEdge {
    pub u: usize,
    pub v: usize,
    /// Cell path from `u`'s cell to `v`'s cell, both included.
    pub cells: Vec<usize>,
}

impl CellGraph {
    fn add_vertex(&mut self, cell: usize) -> usize {
        self.vertices.push(Some(cell));
        self.vertices.len() - 1
    }

    fn add_edge(&mut self, u: usize, v: usize, cells: Vec<usize>) {
        self.edges.push(Some(CellEdge { u, v, cells }));
    }

    /// Live incident edges; self-loops appear twice.
    fn incident(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if let Some(e) = e {
                if e.u == v {
                    out.push(i);
                }
                if e.v == v {
                    out.push(i);
                }
            }
        }
        out
    }

    fn degree(&self, v: usize) -> usize {
        self.incident(v).len()
    }
}

fn path_length(grid: &Grid, cells: &[usize]) -> f64 {
    cells
        .windows(2)
        .map(|w| grid.center_of(w[0]).distance(grid.center_of(w[1])))
        .sum()
}

/// Shortest 8-connected path between two cells of the same cluster.
fn cluster_path(grid: &Grid, cluster: &[Option<usize>], id: usize, from: usize, to: usize) -> Vec<usize> {
    if from == to {
        return vec![from];
    }
    let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    prev.insert(from, from);
    while let Some(c) = queue.pop_front() {
        if c == to {
            break;
        }
        for d in RING {
            let n = grid.offset(c, d);
            if cluster[n] == Some(id) && !prev.contains_key(&n) {
                prev.insert(n, c);
                queue.push_back(n);
            }
        }
    }
    let mut path = vec![to];
    let mut c = to;
    while c != from {
        c = prev[&c];
        path.push(c);
    }
    path.reverse();
    path
}

/// Cells of degree other than two are grouped into 8-connected clusters, one
/// vertex each; chains of degree-two cells between clusters become edges.
pub(crate) fn extract(grid: &Grid, ft: &FeatureTransform, skel: &[bool]) -> CellGraph {
    let n = skel.len();
    let node_mask: Vec<bool> = (0..n).map(|i| skel[i] && neighbour_count(skel, grid, i) != 2).collect();
    let (cluster, count) = grid.components(&node_mask);

    let mut graph = CellGraph::default();
    // representative = deepest cell, lowest index on ties
    let mut rep: Vec<Option<usize>> = vec![None; count];
    for (i, c) in cluster.iter().enumerate() {
        if let Some(c) = *c {
            match rep[c] {
                Some(r) if ft.dist2[r] >= ft.dist2[i] => {}
                _ => rep[c] = Some(i),
            }
        }
    }
    for r in &rep {
        graph.add_vertex(r.expect("cluster without cells"));
    }

    let mut visited = vec![false; n];
    for start in 0..n {
        let Some(ca) = cluster[start] else { continue };
        for d in RING {
            let first = grid.offset(start, d);
            if !skel[first] || node_mask[first] || visited[first] {
                continue;
            }
            let mut chain = vec![first];
            visited[first] = true;
            let mut prev = start;
            let mut cur = first;
            let end = loop {
                let next = RING
                    .iter()
                    .map(|d| grid.offset(cur, *d))
                    .find(|&m| skel[m] && m != prev);
                let Some(next) = next else { break None };
                if node_mask[next] {
                    break Some(next);
                }
                if visited[next] {
                    break None;
                }
                visited[next] = true;
                chain.push(next);
                prev = cur;
                cur = next;
            };
            let Some(end) = end else { continue };
            let cb = cluster[end].unwrap();
            let mut cells = cluster_path(grid, &cluster, ca, rep[ca].unwrap(), start);
            cells.extend(chain);
            cells.extend(cluster_path(grid, &cluster, cb, end, rep[cb].unwrap()));
            graph.add_edge(ca, cb, cells);
        }
    }

    // closed loops with no junction
    for start in 0..n {
        if !skel[start] || node_mask[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        let v = graph.add_vertex(start);
        let mut cells = vec![start];
        let mut prev = start;
        let mut cur = start;
        loop {
            let next = RING
                .iter()
                .map(|d| grid.offset(cur, *d))
                .find(|&m| skel[m] && m != prev && (!visited[m] || (m == start && cells.len() > 2)));
            match next {
                Some(m) if m == start => {
                    cells.push(start);
                    break;
                }
                Some(m) => {
                    visited[m] = true;
                    cells.push(m);
                    prev = cur;
                    cur = m;
                }
                None => break,
            }
        }
        if cells.last() == Some(&start) && cells.len() > 3 {
            graph.add_edge(v, v, cells);
        }
    }
    graph
}

/// Drop short leaf branches hanging off junctions, merge pass-through
/// vertices, then split loops and parallel edges so the graph is simple.
pub(crate) fn simplify(grid: &Grid, ft: &FeatureTransform, graph: &mut CellGraph, min_spur: f64) {
    loop {
        let pruned = prune_spurs(grid, ft, graph, min_spur);
        let merged = merge_degree_two(graph);
        if !pruned && !merged {
            break;
        }
    }
    split_loops_and_parallels(graph);
}

/// A leaf branch is noise when it is shorter than `min_spur`, or when it runs
/// almost straight down the distance gradient: a genuine branch into a corner
/// of opening angle `a` is longer than the depth it loses by `1 / sin(a / 2)`.
fn insignificant(grid: &Grid, ft: &FeatureTransform, e: &CellEdge, leaf_first: bool, min_spur: f64) -> bool {
    let len = path_length(grid, &e.cells);
    if len < min_spur {
        return true;
    }
    let (leaf, hub) = if leaf_first {
        (e.cells[0], *e.cells.last().unwrap())
    } else {
        (*e.cells.last().unwrap(), e.cells[0])
    };
    let drop = (ft.dist(hub) - ft.dist(leaf)) * grid.cell;
    len < SPUR_SLOPE * drop + SPUR_SLACK_CELLS * grid.cell
}

/// Grid paths overestimate straight lengths by up to 8%; corners sharper
/// than about 110 degrees clear this ratio.
const SPUR_SLOPE: f64 = 1.2;
const SPUR_SLACK_CELLS: f64 = 2.0;

fn prune_spurs(grid: &Grid, ft: &FeatureTransform, graph: &mut CellGraph, min_spur: f64) -> bool {
    let degree: Vec<usize> = (0..graph.vertices.len()).map(|v| graph.degree(v)).collect();
    let mut doomed = Vec::new();
    for (i, e) in graph.edges.iter().enumerate() {
        let Some(e) = e else { continue };
        if e.u == e.v {
            continue;
        }
        let leaf = match (degree[e.u], degree[e.v]) {
            (1, d) if d >= 3 => e.u,
            (d, 1) if d >= 3 => e.v,
            _ => continue,
        };
        if !insignificant(grid, ft, e, leaf == e.u, min_spur) {
            continue;
        }
        doomed.push((i, leaf, if leaf == e.u { e.v } else { e.u }));
    }
    // removing two spurs at one junction may drop it below degree three; keep
    // the later ones for the next round
    let mut budget: Vec<usize> = degree.clone();
    let mut changed = false;
    for (i, leaf, hub) in doomed {
        if budget[hub] < 3 {
            continue;
        }
        budget[hub] -= 1;
        graph.edges[i] = None;
        graph.vertices[leaf] = None;
        changed = true;
    }
    changed
}

fn merge_degree_two(graph: &mut CellGraph) -> bool {
    let mut changed = false;
    for v in 0..graph.vertices.len() {
        if graph.vertices[v].is_none() {
            continue;
        }
        let inc = graph.incident(v);
        if inc.len() != 2 || inc[0] == inc[1] {
            continue;
        }
        let mut a = graph.edges[inc[0]].take().unwrap();
        let mut b = graph.edges[inc[1]].take().unwrap();
        if a.v != v {
            std::mem::swap(&mut a.u, &mut a.v);
            a.cells.reverse();
        }
        if b.u != v {
            std::mem::swap(&mut b.u, &mut b.v);
            b.cells.reverse();
        }
        let mut cells = a.cells;
        cells.extend_from_slice(&b.cells[1..]);
        graph.edges[inc[0]] = Some(CellEdge { u: a.u, v: b.v, cells });
        graph.vertices[v] = None;
        changed = true;
    }
    changed
}

fn split_loops_and_parallels(graph: &mut CellGraph) {
    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for i in 0..graph.edges.len() {
        let Some(e) = graph.edges[i].clone() else { continue };
        if e.u == e.v {
            graph.edges[i] = None;
            let len = e.cells.len();
            if len < 4 {
                continue;
            }
            let (s1, s2) = (len / 3, 2 * len / 3);
            let a = graph.add_vertex(e.cells[s1]);
            let b = graph.add_vertex(e.cells[s2]);
            graph.add_edge(e.u, a, e.cells[..=s1].to_vec());
            graph.add_edge(a, b, e.cells[s1..=s2].to_vec());
            graph.add_edge(b, e.v, e.cells[s2..].to_vec());
            continue;
        }
        let key = (e.u.min(e.v), e.u.max(e.v));
        if let std::collections::btree_map::Entry::Vacant(slot) = seen.entry(key) {
            slot.insert(i);
            continue;
        }
        graph.edges[i] = None;
        let len = e.cells.len();
        if len < 3 {
            continue;
        }
        let mid = len / 2;
        let m = graph.add_vertex(e.cells[mid]);
        graph.add_edge(e.u, m, e.cells[..=mid].to_vec());
        graph.add_edge(m, e.v, e.cells[mid..].to_vec());
    }
}

/// Greedy subsequence of `points` whose consecutive gaps stay within `spacing`.
/// Endpoints are always kept.
pub(crate) fn resample<P: Copy>(points: &[P], spacing: f64, dist: impl Fn(P, P) -> f64) -> Vec<P> {
    let Some(&first) = points.first() else {
        return Vec::new();
    };
    let mut out = vec![first];
    for i in 1..points.len() {
        let last = *out.last().unwrap();
        let is_last = i + 1 == points.len();
        if is_last || dist(last, points[i + 1]) > spacing {
            out.push(points[i]);
        }
    }
    out
}
