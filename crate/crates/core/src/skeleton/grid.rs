//! Raster stage: occupancy grid, exact Euclidean feature transform and
//! topology-preserving thinning down to a one-cell-wide medial skeleton.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::geometry::{Environment, Point2};

/// 8-neighbourhood in circular order.
pub(crate) const RING: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Occupancy grid padded with one ring of blocked cells.
pub(crate) struct Grid {
    pub width: usize,
    pub height: usize,
    pub cell: f64,
    origin: Point2,
    pub free: Vec<bool>,
}

impl Grid {
    pub fn rasterize(env: &Environment, cell: f64) -> Self {
        let b = env.boundary();
        let nx = (b.width() / cell).ceil() as usize;
        let ny = (b.height() / cell).ceil() as usize;
        let (width, height) = (nx + 2, ny + 2);
        let mut grid = Grid {
            width,
            height,
            cell,
            origin: b.min,
            free: vec![false; width * height],
        };
        for j in 1..height - 1 {
            for i in 1..width - 1 {
                let c = grid.center(i, j);
                // cells overhanging the boundary (from rounding up) stay blocked
                if c.x < b.max.x && c.y < b.max.y && env.point_is_free(c) {
                    grid.free[j * width + i] = true;
                }
            }
        }
        grid
    }

    #[cfg(test)]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.width, idx / self.width)
    }

    /// World position of a padded cell's centre.
    pub fn center(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            self.origin.x + (i as f64 - 0.5) * self.cell,
            self.origin.y + (j as f64 - 0.5) * self.cell,
        )
    }

    pub fn center_of(&self, idx: usize) -> Point2 {
        let (i, j) = self.coords(idx);
        self.center(i, j)
    }

    /// Neighbour index; padding guarantees interior cells never leave the grid.
    pub fn offset(&self, idx: usize, (di, dj): (i64, i64)) -> usize {
        (idx as i64 + dj * self.width as i64 + di) as usize
    }

    fn interior(&self, idx: usize) -> bool {
        let (i, j) = self.coords(idx);
        i > 0 && j > 0 && i < self.width - 1 && j < self.height - 1
    }

    /// 8-connected components of `mask`, labelled in scan order.
    pub fn components(&self, mask: &[bool]) -> (Vec<Option<usize>>, usize) {
        let mut label = vec![None; mask.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..mask.len() {
            if !mask[start] || label[start].is_some() {
                continue;
            }
            label[start] = Some(count);
            stack.push(start);
            while let Some(c) = stack.pop() {
                for d in RING {
                    let n = self.offset(c, d);
                    if mask[n] && label[n].is_none() {
                        label[n] = Some(count);
                        stack.push(n);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }
}

/// Nearest blocked cell (as padded grid coordinates) and squared distance, per cell.
pub(crate) struct FeatureTransform {
    pub dist2: Vec<i64>,
    pub feature: Vec<(i64, i64)>,
}

impl FeatureTransform {
    pub fn dist(&self, idx: usize) -> f64 {
        (self.dist2[idx] as f64).sqrt()
    }
}

/// One-dimensional lower envelope of parabolas `f[q] + (x - q)^2`.
fn envelope_1d(f: &[i64], out_d: &mut [i64], out_arg: &mut [usize]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as i64) - (f[p] + (p * p) as i64)) as f64 / (2 * q - 2 * p) as f64;
            if s <= z[k] {
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as i64 - p as i64;
        out_d[q] = dq * dq + f[p];
        out_arg[q] = p;
    }
}

/// Exact Euclidean feature transform (separable lower-envelope method).
pub(crate) fn feature_transform(grid: &Grid) -> FeatureTransform {
    let (w, h) = (grid.width, grid.height);
    // column pass: nearest blocked row in each column
    let mut col_d2 = vec![0i64; w * h];
    let mut col_site = vec![0usize; w * h];
    for i in 0..w {
        let mut last: Option<usize> = None;
        for j in 0..h {
            if !grid.free[j * w + i] {
                last = Some(j);
            }
            col_site[j * w + i] = last.unwrap_or(usize::MAX);
        }
        let mut next: Option<usize> = None;
        for j in (0..h).rev() {
            if !grid.free[j * w + i] {
                next = Some(j);
            }
            let idx = j * w + i;
            let up = col_site[idx];
            let best = match (up, next) {
                (usize::MAX, Some(n)) => n,
                (u, Some(n)) if n - j < j - u => n,
                (u, _) => u,
            };
            col_site[idx] = best;
            let d = best as i64 - j as i64;
            col_d2[idx] = d * d;
        }
    }
    let mut dist2 = vec![0i64; w * h];
    let mut feature = vec![(0i64, 0i64); w * h];
    let mut f = vec![0i64; w];
    let mut d = vec![0i64; w];
    let mut arg = vec![0usize; w];
    for j in 0..h {
        for i in 0..w {
            f[i] = col_d2[j * w + i];
        }
        envelope_1d(&f, &mut d, &mut arg);
        for i in 0..w {
            let idx = j * w + i;
            dist2[idx] = d[i];
            let src = arg[i];
            feature[idx] = (src as i64, col_site[j * w + src] as i64);
        }
    }
    FeatureTransform { dist2, feature }
}

/// Medial cells by the feature-distance criterion: two 4-adjacent free cells
/// whose nearest obstacle cells are more than `sqrt(gamma)` and more than their
/// own distance apart straddle the medial axis; the one nearer the bisector is
/// marked.
pub(crate) fn medial_anchors(grid: &Grid, ft: &FeatureTransform, gamma: i64) -> Vec<bool> {
    let mut anchor = vec![false; grid.free.len()];
    for p in 0..grid.free.len() {
        if !grid.free[p] {
            continue;
        }
        let (pi, pj) = grid.coords(p);
        for d in [(1, 0), (0, 1)] {
            let q = grid.offset(p, d);
            if !grid.free[q] {
                continue;
            }
            let fp = ft.feature[p];
            let fq = ft.feature[q];
            let (dx, dy) = (fq.0 - fp.0, fq.1 - fp.1);
            // the pair must straddle a wide angle, not just a raster step
            let sep = dx * dx + dy * dy;
            if sep <= gamma || sep <= ft.dist2[p].min(ft.dist2[q]) {
                continue;
            }
            let (qi, qj) = (pi as i64 + d.0, pj as i64 + d.1);
            let (mx, my) = (fp.0 + fq.0, fp.1 + fq.1);
            let sp = dx * (2 * pi as i64 - mx) + dy * (2 * pj as i64 - my);
            let sq = dx * (2 * qi - mx) + dy * (2 * qj - my);
            if sp.abs() <= sq.abs() {
                anchor[p] = true;
            } else {
                anchor[q] = true;
            }
        }
    }
    anchor
}

fn mask_of(set: &[bool], grid: &Grid, idx: usize) -> u8 {
    let mut m = 0u8;
    for (bit, d) in RING.iter().enumerate() {
        if set[grid.offset(idx, *d)] {
            m |= 1 << bit;
        }
    }
    m
}

/// Simple-point table for (8, 4) connectivity indexed by the ring mask.
fn simple_table() -> &'static [bool; 256] {
    static TABLE: OnceLock<[bool; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [false; 256];
        for (m, slot) in t.iter_mut().enumerate() {
            *slot = topological_numbers(m as u8) == (1, 1);
        }
        t
    })
}

/// (T8 of foreground, T4 of background 4-adjacent to the centre).
fn topological_numbers(mask: u8) -> (usize, usize) {
    let fg: Vec<usize> = (0..8).filter(|b| mask & (1 << b) != 0).collect();
    let bg: Vec<usize> = (0..8).filter(|b| mask & (1 << b) == 0).collect();
    let adj8 = |a: usize, b: usize| {
        let (p, q) = (RING[a], RING[b]);
        (p.0 - q.0).abs() <= 1 && (p.1 - q.1).abs() <= 1
    };
    let adj4 = |a: usize, b: usize| {
        let (p, q) = (RING[a], RING[b]);
        (p.0 - q.0).abs() + (p.1 - q.1).abs() == 1
    };
    let count = |cells: &[usize], adj: &dyn Fn(usize, usize) -> bool, keep: &dyn Fn(&[usize]) -> bool| {
        let mut seen = vec![false; cells.len()];
        let mut n = 0;
        for s in 0..cells.len() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![cells[s]];
            let mut stack = vec![s];
            while let Some(c) = stack.pop() {
                for o in 0..cells.len() {
                    if !seen[o] && adj(cells[c], cells[o]) {
                        seen[o] = true;
                        comp.push(cells[o]);
                        stack.push(o);
                    }
                }
            }
            if keep(&comp) {
                n += 1;
            }
        }
        n
    };
    let t8 = count(&fg, &adj8, &|_| true);
    // background components must touch an edge-neighbour of the centre
    let t4 = count(&bg, &adj4, &|comp| comp.iter().any(|b| b % 2 == 0));
    (t8, t4)
}

fn is_simple(set: &[bool], grid: &Grid, idx: usize) -> bool {
    simple_table()[mask_of(set, grid, idx) as usize]
}

pub(crate) fn neighbour_count(set: &[bool], grid: &Grid, idx: usize) -> usize {
    mask_of(set, grid, idx).count_ones() as usize
}

/// Distance-ordered homotopic thinning followed by an endpoint-preserving
/// cleanup pass. Removes simple, non-anchor cells in increasing distance order.
pub(crate) fn thin(grid: &Grid, ft: &FeatureTransform, anchors: &[bool]) -> Vec<bool> {
    let mut set = grid.free.clone();
    let mut queued = vec![false; set.len()];
    let mut heap = BinaryHeap::new();
    for idx in 0..set.len() {
        if set[idx] && RING.iter().any(|d| !set[grid.offset(idx, *d)]) {
            queued[idx] = true;
            heap.push(Reverse((ft.dist2[idx], idx)));
        }
    }
    while let Some(Reverse((_, idx))) = heap.pop() {
        queued[idx] = false;
        if !set[idx] || anchors[idx] || !is_simple(&set, grid, idx) {
            continue;
        }
        set[idx] = false;
        for d in RING {
            let n = grid.offset(idx, d);
            if set[n] && !queued[n] && grid.interior(n) {
                queued[n] = true;
                heap.push(Reverse((ft.dist2[n], n)));
            }
        }
    }
    // anchors can leave two-cell-thick ridges; strip redundant cells while
    // keeping line ends
    loop {
        let mut changed = false;
        for idx in 0..set.len() {
            if set[idx] && neighbour_count(&set, grid, idx) > 1 && is_simple(&set, grid, idx) {
                set[idx] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    set
}
