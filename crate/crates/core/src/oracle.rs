//! Brute-force ground truth on a raster.
//!
//! Nothing here is certified. These routines are deliberately simple and
//! share no code with the sweep, so that agreement between the two is
//! evidence that both are right.

use std::collections::HashMap;

use crate::domain::Scene;
use crate::geom::{Axis, Box2, Point};
use crate::poly::Poly2;
use crate::reeb::{Edge, VDigraph, Vertex};

/// Membership of cell centers in the seed component.
#[derive(Clone, Debug)]
pub struct GridMask {
    pub resolution: usize,
    pub bbox: Box2,
    bits: Vec<bool>,
}

impl GridMask {
    /// Mask of the cells whose centers satisfy `inside`.
    pub fn from_fn(bbox: Box2, resolution: usize, inside: impl Fn(Point) -> bool) -> GridMask {
        let n = resolution.max(2);
        let mut m = GridMask { resolution: n, bbox, bits: vec![false; n * n] };
        for k in 0..n * n {
            m.bits[k] = inside(m.center(k % n, k / n));
        }
        m
    }

    pub fn get(&self, ix: usize, iy: usize) -> bool {
        self.bits[iy * self.resolution + ix]
    }

    pub fn cell(&self) -> (f64, f64) {
        (self.bbox.width() / self.resolution as f64, self.bbox.height() / self.resolution as f64)
    }

    pub fn center(&self, ix: usize, iy: usize) -> Point {
        let (hx, hy) = self.cell();
        Point::new(self.bbox.x_lo + (ix as f64 + 0.5) * hx, self.bbox.y_lo + (iy as f64 + 0.5) * hy)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn area(&self) -> f64 {
        let (hx, hy) = self.cell();
        self.count() as f64 * hx * hy
    }

    /// No border cell is set.
    pub fn bounded(&self) -> bool {
        let n = self.resolution;
        (0..n).all(|i| !self.get(i, 0) && !self.get(i, n - 1) && !self.get(0, i) && !self.get(n - 1, i))
    }

    /// Bounded components of the complement, 8-connected.
    pub fn holes(&self) -> usize {
        let n = self.resolution;
        let mut label = vec![usize::MAX; n * n];
        let mut holes = 0;
        for start in 0..n * n {
            if self.bits[start] || label[start] != usize::MAX {
                continue;
            }
            let mut border = false;
            let mut stack = vec![start];
            label[start] = start;
            while let Some(k) = stack.pop() {
                let (ix, iy) = ((k % n) as isize, (k / n) as isize);
                if ix == 0 || iy == 0 || ix == n as isize - 1 || iy == n as isize - 1 {
                    border = true;
                }
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (jx, jy) = (ix + dx, iy + dy);
                        if jx < 0 || jy < 0 || jx >= n as isize || jy >= n as isize {
                            continue;
                        }
                        let j = jy as usize * n + jx as usize;
                        if !self.bits[j] && label[j] == usize::MAX {
                            label[j] = start;
                            stack.push(j);
                        }
                    }
                }
            }
            if !border {
                holes += 1;
            }
        }
        holes
    }

    /// Membership of the cell containing `q`.
    pub fn at(&self, q: Point) -> bool {
        let (hx, hy) = self.cell();
        let ix = ((q.x - self.bbox.x_lo) / hx).floor();
        let iy = ((q.y - self.bbox.y_lo) / hy).floor();
        let n = self.resolution as f64;
        (0.0..n).contains(&ix) && (0.0..n).contains(&iy) && self.get(ix as usize, iy as usize)
    }
}

fn signs(curves: &[Poly2], q: Point) -> Vec<bool> {
    curves.iter().map(|f| f.eval(q) > 0.0).collect()
}

/// Flood fill from the seed over 4-neighbours whose centers have the same
/// sign vector as the seed.
pub fn grid_mask(scene: &Scene, resolution: usize) -> GridMask {
    let n = resolution.max(2);
    let mut mask = GridMask { resolution: n, bbox: scene.bbox, bits: vec![false; n * n] };
    let target = signs(&scene.curves, scene.seed);
    let sv: Vec<Vec<bool>> = (0..n * n).map(|k| signs(&scene.curves, mask.center(k % n, k / n))).collect();
    let (hx, hy) = mask.cell();
    let sx = (((scene.seed.x - scene.bbox.x_lo) / hx) as usize).min(n - 1);
    let sy = (((scene.seed.y - scene.bbox.y_lo) / hy) as usize).min(n - 1);
    // The seed's own cell center may sit across a curve; look nearby.
    let mut start = None;
    'search: for r in 0..4isize {
        for dy in -r..=r {
            for dx in -r..=r {
                let (x, y) = (sx as isize + dx, sy as isize + dy);
                if x >= 0 && y >= 0 && (x as usize) < n && (y as usize) < n && sv[y as usize * n + x as usize] == target {
                    start = Some(y as usize * n + x as usize);
                    break 'search;
                }
            }
        }
    }
    let Some(start) = start else { return mask };
    let mut stack = vec![start];
    mask.bits[start] = true;
    while let Some(k) = stack.pop() {
        let (ix, iy) = (k % n, k / n);
        let nbrs = [
            (ix > 0).then(|| k - 1),
            (ix + 1 < n).then(|| k + 1),
            (iy > 0).then(|| k - n),
            (iy + 1 < n).then(|| k + n),
        ];
        for j in nbrs.into_iter().flatten() {
            if !mask.bits[j] && sv[j] == target {
                mask.bits[j] = true;
                stack.push(j);
            }
        }
    }
    mask
}

/// Reeb graph of the rasterized domain: runs of set cells in each column
/// (sweeping along `axis`) linked by overlap with the next column.
pub fn grid_reeb(scene: &Scene, axis: Axis, resolution: usize) -> VDigraph {
    let mask = grid_mask(scene, resolution);
    reeb_of_mask(&mask, axis)
}

pub fn reeb_of_mask(mask: &GridMask, axis: Axis) -> VDigraph {
    let n = mask.resolution;
    let (hx, hy) = mask.cell();
    let (h, t0) = match axis {
        Axis::X => (hx, mask.bbox.x_lo),
        Axis::Y => (hy, mask.bbox.y_lo),
    };
    let set = |col: usize, k: usize| match axis {
        Axis::X => mask.get(col, k),
        Axis::Y => mask.get(k, col),
    };
    // Half-open runs [a, b) per column.
    let runs: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|c| {
            let mut out = Vec::new();
            let mut k = 0;
            while k < n {
                if set(c, k) {
                    let a = k;
                    while k < n && set(c, k) {
                        k += 1;
                    }
                    out.push((a, k));
                } else {
                    k += 1;
                }
            }
            out
        })
        .collect();
    let offset: Vec<usize> = runs
        .iter()
        .scan(0, |acc, r| {
            let o = *acc;
            *acc += r.len();
            Some(o)
        })
        .collect();
    let total = offset.last().map_or(0, |o| o + runs[n - 1].len());
    let mut uf: Vec<usize> = (0..total).collect();
    let mut vertices: Vec<Vertex> = Vec::new();
    // Per run: vertex at its low end and at its high end.
    let mut low_end: HashMap<usize, usize> = HashMap::new();
    let mut high_end: HashMap<usize, usize> = HashMap::new();
    let new_vertex = |height: f64, vertices: &mut Vec<Vertex>| {
        vertices.push(Vertex { id: vertices.len(), height, provenance: None });
        vertices.len() - 1
    };

    for c in 0..n {
        let boundary = t0 + c as f64 * h;
        let prev: &[(usize, usize)] = if c == 0 { &[] } else { &runs[c - 1] };
        let cur = &runs[c];
        // Components of the overlap relation between the two columns.
        let np = prev.len();
        let mut link: Vec<usize> = (0..np + cur.len()).collect();
        for (i, a) in prev.iter().enumerate() {
            for (j, b) in cur.iter().enumerate() {
                if a.0.max(b.0) < a.1.min(b.1) {
                    let (ri, rj) = (root(&mut link, i), root(&mut link, np + j));
                    link[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut groups: HashMap<usize, (Vec<usize>, Vec<usize>)> = HashMap::new();
        for i in 0..np {
            let r = root(&mut link, i);
            groups.entry(r).or_default().0.push(offset[c - 1] + i);
        }
        for j in 0..cur.len() {
            let r = root(&mut link, np + j);
            groups.entry(r).or_default().1.push(offset[c] + j);
        }
        let mut keys: Vec<usize> = groups.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let (left, right) = &groups[&key];
            if left.len() == 1 && right.len() == 1 {
                let (a, b) = (root(&mut uf, left[0]), root(&mut uf, right[0]));
                uf[a.max(b)] = a.min(b);
                continue;
            }
            let v = new_vertex(boundary, &mut vertices);
            for &r in left {
                high_end.insert(r, v);
            }
            for &r in right {
                low_end.insert(r, v);
            }
        }
    }
    // Runs in the last column end at the box edge.
    let top = t0 + n as f64 * h;
    for j in 0..runs[n - 1].len() {
        let v = new_vertex(top, &mut vertices);
        high_end.insert(offset[n - 1] + j, v);
    }
    let mut chains: HashMap<usize, (Option<usize>, Option<usize>)> = HashMap::new();
    for (&r, &v) in &low_end {
        let k = root(&mut uf, r);
        chains.entry(k).or_default().0 = Some(v);
    }
    for (&r, &v) in &high_end {
        let k = root(&mut uf, r);
        chains.entry(k).or_default().1 = Some(v);
    }
    let mut edges: Vec<Edge> = chains
        .values()
        .filter_map(|&(a, b)| Some(Edge { from: a?, to: b? }))
        .collect();
    edges.sort_by_key(|e| (e.from, e.to));
    VDigraph { vertices, edges }
}

fn root(p: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while p[r] != r {
        r = p[r];
    }
    p[i] = r;
    r
}

/// Counts of differential-geometric features found by dense sampling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DiffGeoCounts {
    pub inflection_count: usize,
    pub cv_count: usize,
    pub bitangent_count: usize,
}

struct Sampled {
    points: Vec<Point>,
    closed: bool,
}

/// Marching-squares polylines of `{f = 0}`, with vertices pulled onto the
/// curve by a few gradient steps.
fn sample_curve(f: &Poly2, bbox: &Box2, resolution: usize) -> Vec<Sampled> {
    let n = resolution.max(8);
    let (hx, hy) = (bbox.width() / n as f64, bbox.height() / n as f64);
    let node = |i: usize, j: usize| Point::new(bbox.x_lo + i as f64 * hx, bbox.y_lo + j as f64 * hy);
    let vals: Vec<f64> = (0..=n).flat_map(|j| (0..=n).map(move |i| (i, j))).map(|(i, j)| f.eval(node(i, j))).collect();
    let v = |i: usize, j: usize| vals[j * (n + 1) + i];
    let neg = |i: usize, j: usize| v(i, j) < 0.0;
    // Edge ids: horizontal edges (i, j)-(i+1, j), then vertical ones.
    let hid = |i: usize, j: usize| j * n + i;
    let vid = |i: usize, j: usize| n * (n + 1) + j * (n + 1) + i;
    let mut segs: Vec<(usize, usize)> = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let corners = [neg(i, j), neg(i + 1, j), neg(i + 1, j + 1), neg(i, j + 1)];
            let edges = [hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)];
            let cut: Vec<usize> = (0..4).filter(|&k| corners[k] != corners[(k + 1) % 4]).map(|k| edges[k]).collect();
            match cut.len() {
                2 => segs.push((cut[0], cut[1])),
                4 => {
                    let c = f.eval(Point::new(bbox.x_lo + (i as f64 + 0.5) * hx, bbox.y_lo + (j as f64 + 0.5) * hy)) < 0.0;
                    if c == corners[0] {
                        segs.push((cut[0], cut[1]));
                        segs.push((cut[2], cut[3]));
                    } else {
                        segs.push((cut[3], cut[0]));
                        segs.push((cut[1], cut[2]));
                    }
                }
                _ => {}
            }
        }
    }
    let edge_point = |e: usize| -> Point {
        let (a, b) = if e < n * (n + 1) {
            let (i, j) = (e % n, e / n);
            ((i, j), (i + 1, j))
        } else {
            let e = e - n * (n + 1);
            let (i, j) = (e % (n + 1), e / (n + 1));
            ((i, j), (i, j + 1))
        };
        let (fa, fb) = (v(a.0, a.1), v(b.0, b.1));
        let p = node(a.0, a.1).lerp(node(b.0, b.1), fa / (fa - fb));
        project(f, p)
    };
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, s) in segs.iter().enumerate() {
        adj.entry(s.0).or_default().push(k);
        adj.entry(s.1).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();
    // Open chains start at edges with a single segment.
    let mut starts: Vec<usize> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(&e, _)| e).collect();
    starts.sort_unstable();
    let walk = |start_edge: usize, used: &mut Vec<bool>| -> Option<Sampled> {
        let mut chain = vec![start_edge];
        let mut e = start_edge;
        while let Some(&k) = adj[&e].iter().find(|&&k| !used[k]) {
            used[k] = true;
            e = if segs[k].0 == e { segs[k].1 } else { segs[k].0 };
            chain.push(e);
        }
        if chain.len() < 2 {
            return None;
        }
        let closed = chain.first() == chain.last();
        if closed {
            chain.pop();
        }
        let mut points: Vec<Point> = Vec::with_capacity(chain.len());
        for p in chain.into_iter().map(edge_point) {
            // Curve through a grid node: both edges give the same point.
            if points.last().is_none_or(|q: &Point| q.dist(p) > 1e-9 * hx) {
                points.push(p);
            }
        }
        if closed && points.len() > 1 && points[0].dist(points[points.len() - 1]) <= 1e-9 * hx {
            points.pop();
        }
        Some(Sampled { points, closed })
    };
    for s in starts {
        if let Some(p) = walk(s, &mut used) {
            out.push(p);
        }
    }
    for k in 0..segs.len() {
        if !used[k] {
            if let Some(p) = walk(segs[k].0, &mut used) {
                out.push(p);
            }
        }
    }
    out
}

fn project(f: &Poly2, mut p: Point) -> Point {
    let (fx, fy) = (f.dx(), f.dy());
    for _ in 0..4 {
        let g = Point::new(fx.eval(p), fy.eval(p));
        let g2 = g.dot(g);
        if g2 == 0.0 {
            break;
        }
        p = p - g * (f.eval(p) / g2);
    }
    p
}

/// Counts inflections, curvature vertices and bitangent lines of `{f = 0}`
/// inside the box by sampling.
pub fn sampled_diffgeo_scan(f: &Poly2, bbox: &Box2, resolution: usize) -> DiffGeoCounts {
    let (fx, fy) = (f.dx(), f.dy());
    let (fxx, fxy, fyy) = (fx.dx(), fx.dy(), fy.dy());
    let numerator = |p: Point| {
        let (a, b) = (fx.eval(p), fy.eval(p));
        b * b * fxx.eval(p) - 2.0 * a * b * fxy.eval(p) + a * a * fyy.eval(p)
    };
    let kappa = |p: Point| {
        let g = Point::new(fx.eval(p), fy.eval(p));
        numerator(p) / g.norm().powi(3)
    };
    let lines = sample_curve(f, bbox, resolution);
    let mut counts = DiffGeoCounts::default();
    let mut tangents: Vec<Tangent> = Vec::new();
    for (li, line) in lines.iter().enumerate() {
        let pts = &line.points;
        if pts.len() < 4 {
            continue;
        }
        let m = pts.len();
        let idx = |k: usize| if line.closed { k % m } else { k };
        let steps = if line.closed { m } else { m - 1 };
        let nvals: Vec<f64> = pts.iter().map(|&p| numerator(p)).collect();
        let nscale = nvals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        counts.inflection_count += sign_changes((0..=steps).map(|k| nvals[idx(k)]), 1e-9 * nscale, line.closed);

        // Finite-difference slope of curvature along arc length.
        let ks: Vec<f64> = pts.iter().map(|&p| kappa(p)).collect();
        let kscale = ks.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
        let slopes: Vec<f64> = (0..steps)
            .map(|k| {
                let (a, b) = (idx(k), idx(k + 1));
                (ks[b] - ks[a]) / pts[a].dist(pts[b]).max(1e-300)
            })
            .collect();
        counts.cv_count += sign_changes(slopes.iter().copied(), 1e-6 * kscale / bbox.diameter(), line.closed);

        let mut s = 0.0;
        for k in 0..m {
            if k > 0 {
                s += pts[k].dist(pts[k - 1]);
            }
            let g = Point::new(fx.eval(pts[k]), fy.eval(pts[k]));
            let mut nrm = g.normalized();
            if nrm.y < 0.0 || (nrm.y == 0.0 && nrm.x < 0.0) {
                nrm = -nrm;
            }
            let angle = nrm.angle().rem_euclid(std::f64::consts::PI);
            tangents.push(Tangent { line: li, s, p: pts[k], normal: nrm, angle, kappa: ks[k] });
        }
    }
    counts.bitangent_count = count_bitangents(&tangents, bbox, resolution);
    counts
}

/// Sign changes of a sequence, ignoring entries below `eps` in magnitude.
fn sign_changes(vals: impl Iterator<Item = f64>, eps: f64, closed: bool) -> usize {
    let signs: Vec<bool> = vals.filter(|v| v.abs() > eps).map(|v| v > 0.0).collect();
    let mut n = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if closed && signs.len() > 1 && signs[0] != signs[signs.len() - 1] {
        n += 1;
    }
    n
}

/// Pairs of well-separated samples whose tangent lines coincide within a
/// resolution-scaled tolerance, clustered by their contact points.
fn count_bitangents(samples: &[Tangent], bbox: &Box2, resolution: usize) -> usize {
    use std::f64::consts::PI;
    let h = bbox.diameter() / resolution as f64;
    let sep = 20.0 * h;
    let kmax = samples.iter().fold(1.0 / bbox.diameter(), |m, t| m.max(t.kappa.abs()));
    let window = 4.0 * kmax * h;
    // Normal angles live in [0, pi); copy the low end past pi so that
    // nearly horizontal normals meet their neighbours across the wrap.
    let mut order: Vec<(f64, usize)> = samples.iter().enumerate().map(|(k, t)| (t.angle, k)).collect();
    order.extend(samples.iter().enumerate().filter(|(_, t)| t.angle < window).map(|(k, t)| (t.angle + PI, k)));
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut hits: Vec<(Point, Point)> = Vec::new();
    for (oi, &(ai, i)) in order.iter().enumerate() {
        for &(aj, j) in &order[oi + 1..] {
            if aj - ai > window {
                break;
            }
            let (ti, tj) = (&samples[i], &samples[j]);
            if i == j || (ti.line == tj.line && (ti.s - tj.s).abs() < sep) || ti.p.dist(tj.p) < sep {
                continue;
            }
            // Samples sit within half a step of the true contacts.
            let tol_a = (ti.kappa.abs() + tj.kappa.abs()) * h + 1e-12;
            if aj - ai > tol_a {
                continue;
            }
            let d = ti.p.dist(tj.p);
            let tol_d = (d + h) * tol_a;
            if ti.normal.dot(tj.p - ti.p).abs() <= tol_d && tj.normal.dot(ti.p - tj.p).abs() <= tol_d {
                hits.push((ti.p, tj.p));
            }
        }
    }
    let near = |a: (Point, Point), b: (Point, Point)| {
        let r = 10.0 * h + 0.05 * a.0.dist(a.1);
        (a.0.dist(b.0) < r && a.1.dist(b.1) < r) || (a.0.dist(b.1) < r && a.1.dist(b.0) < r)
    };
    let mut lines: Vec<(Point, Point)> = Vec::new();
    for hit in hits {
        if !lines.iter().any(|&l| near(l, hit)) {
            lines.push(hit);
        }
    }
    lines.len()
}

struct Tangent {
    line: usize,
    s: f64,
    p: Point,
    normal: Point,
    angle: f64,
    kappa: f64,
}
