//! Building a domain whose Poincaré-Reeb graph is a given V-digraph.
//!
//! The input is a planar graph drawn so that `x` is the height. Branching
//! vertices are split so that incoming and outgoing edges meet at different
//! points, the graph is thickened to a tube whose boundary is fitted by one
//! polynomial, and circles are carved out at the tube's crotches and ends so
//! that every vertex of the resulting graph sits at a controlled height.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curvegeo::{check_nonsingular, Singularity};
use crate::domain::{build_domain, Domain, Scene};
use crate::error::{Error, Result};
use crate::geom::{Axis, Box2, Point};
use crate::oracle::{grid_mask, reeb_of_mask, GridMask};
use crate::poly::{Poly1, Poly2};
use crate::reeb::{homeomorphic, poincare_reeb, Edge, IsoMode, Provenance, VDigraph, Vertex};
use crate::roots::isolate_univariate_roots;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphVertex {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

impl GraphVertex {
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    /// Points from `a` to `b`; endpoints may be omitted.
    #[serde(default)]
    pub polyline: Vec<Point>,
    /// A vertical segment added by vertex splitting.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub joint: bool,
}

/// A planar drawing of a graph in which `x` plays the role of height.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedGraph {
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    /// Half-width of the tube.
    pub width: f64,
    pub fit_degree: u32,
    pub resolution: usize,
}

impl Default for TubeSpec {
    fn default() -> Self {
        TubeSpec { width: 0.15, fit_degree: 10, resolution: 256 }
    }
}

const DEGREE_CAP: u32 = 16;

impl EmbeddedGraph {
    pub fn from_json(s: &str) -> Result<EmbeddedGraph> {
        let mut g: EmbeddedGraph = serde_json::from_str(s)?;
        g.normalize()?;
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    /// Straight-edged graph from positions and index pairs.
    pub fn straight(points: &[Point], edges: &[(usize, usize)]) -> Result<EmbeddedGraph> {
        let mut g = EmbeddedGraph {
            vertices: points.iter().enumerate().map(|(id, p)| GraphVertex { id, x: p.x, y: p.y }).collect(),
            edges: edges.iter().map(|&(a, b)| GraphEdge { a, b, polyline: Vec::new(), joint: false }).collect(),
        };
        g.normalize()?;
        g.validate()?;
        Ok(g)
    }

    pub fn vertex(&self, id: usize) -> Option<&GraphVertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    fn pos(&self, id: usize) -> Result<Point> {
        self.vertex(id).map(|v| v.position()).ok_or_else(|| Error::InvalidInput(format!("unknown vertex {id}")))
    }

    /// Completes every polyline with its endpoints.
    pub fn normalize(&mut self) -> Result<()> {
        for k in 0..self.edges.len() {
            let (pa, pb) = (self.pos(self.edges[k].a)?, self.pos(self.edges[k].b)?);
            let e = &mut self.edges[k];
            if e.polyline.first().is_none_or(|p| p.dist(pa) > 1e-12) {
                e.polyline.insert(0, pa);
            }
            if e.polyline.last().is_none_or(|p| p.dist(pb) > 1e-12) {
                e.polyline.push(pb);
            }
        }
        Ok(())
    }

    /// Neighbour directions at `id`: `true` for edges leaving upward.
    fn sides(&self, id: usize) -> Vec<bool> {
        let x = self.vertex(id).map_or(f64::NAN, |v| v.x);
        self.edges
            .iter()
            .filter(|e| !e.joint)
            .filter_map(|e| {
                if e.a == id {
                    Some(e.polyline[1].x > x)
                } else if e.b == id {
                    Some(e.polyline[e.polyline.len() - 2].x > x)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn in_out(&self, id: usize) -> (usize, usize) {
        let s = self.sides(id);
        let up = s.iter().filter(|&&u| u).count();
        (s.len() - up, up)
    }

    pub fn validate(&self) -> Result<()> {
        if self.edges.is_empty() {
            return Err(Error::InvalidInput("graph has no edges".into()));
        }
        let mut ids: Vec<usize> = self.vertices.iter().map(|v| v.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate vertex id".into()));
        }
        for e in &self.edges {
            if e.a == e.b || e.polyline.len() < 2 {
                return Err(Error::InvalidInput(format!("degenerate edge {}-{}", e.a, e.b)));
            }
            let (pa, pb) = (self.pos(e.a)?, self.pos(e.b)?);
            if e.polyline[0].dist(pa) > 1e-12 || e.polyline[e.polyline.len() - 1].dist(pb) > 1e-12 {
                return Err(Error::InvalidInput(format!("polyline of edge {}-{} misses its endpoints", e.a, e.b)));
            }
            let dx: Vec<f64> = e.polyline.windows(2).map(|w| w[1].x - w[0].x).collect();
            let monotone = if e.joint {
                dx.iter().all(|d| d.abs() <= 1e-12)
            } else {
                dx.iter().all(|&d| d > 0.0) || dx.iter().all(|&d| d < 0.0)
            };
            if !monotone {
                return Err(Error::InvalidInput(format!("x is not strictly monotone along edge {}-{}", e.a, e.b)));
            }
        }
        for v in &self.vertices {
            let (i, o) = self.in_out(v.id);
            let joints = self.edges.iter().filter(|e| e.joint && (e.a == v.id || e.b == v.id)).count();
            if i + o + joints == 0 {
                return Err(Error::InvalidInput(format!("vertex {} is isolated", v.id)));
            }
            if joints == 0 && (i == 0 || o == 0) && i + o != 1 {
                return Err(Error::InvalidInput(format!("local extremum {} has degree {}", v.id, i + o)));
            }
        }
        // Edges may only meet at shared endpoints.
        let segs: Vec<(usize, Point, Point, [usize; 2])> = self
            .edges
            .iter()
            .enumerate()
            .flat_map(|(k, e)| e.polyline.windows(2).map(move |w| (k, w[0], w[1], [e.a, e.b])))
            .collect();
        for (i, s) in segs.iter().enumerate() {
            for t in &segs[i + 1..] {
                if s.0 == t.0 {
                    continue;
                }
                let shared = s.3.iter().any(|v| t.3.contains(v));
                if let Some(p) = segment_intersection(s.1, s.2, t.1, t.2) {
                    let at_shared_end = shared
                        && s.3.iter().filter(|v| t.3.contains(v)).any(|&v| self.pos(v).is_ok_and(|q| q.dist(p) <= 1e-9));
                    if !at_shared_end {
                        return Err(Error::InvalidInput(format!("edges {} and {} cross at {p}", s.0, t.0)));
                    }
                }
            }
        }
        if !self.to_vdigraph().is_connected() {
            return Err(Error::InvalidInput("graph is not connected".into()));
        }
        Ok(())
    }

    /// The V-digraph the drawing encodes: heights are `x`, edges point up.
    /// Vertical joint edges are contracted.
    pub fn to_vdigraph(&self) -> VDigraph {
        let mut rep: BTreeMap<usize, usize> = self.vertices.iter().map(|v| (v.id, v.id)).collect();
        for e in self.edges.iter().filter(|e| e.joint) {
            let (a, b) = (rep[&e.a], rep[&e.b]);
            let keep = a.min(b);
            for r in rep.values_mut() {
                if *r == a || *r == b {
                    *r = keep;
                }
            }
        }
        let vertices = self
            .vertices
            .iter()
            .filter(|v| rep[&v.id] == v.id)
            .map(|v| Vertex { id: v.id, height: v.x, provenance: Some(Provenance::Input { id: v.id }) })
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| !e.joint)
            .map(|e| {
                let (a, b) = (rep[&e.a], rep[&e.b]);
                if self.vertex(e.a).unwrap().x < self.vertex(e.b).unwrap().x {
                    Edge { from: a, to: b }
                } else {
                    Edge { from: b, to: a }
                }
            })
            .collect();
        VDigraph { vertices, edges }
    }

    fn bbox(&self) -> Box2 {
        let pts = self.edges.iter().flat_map(|e| e.polyline.iter().copied());
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in pts.chain(self.vertices.iter().map(|v| v.position())) {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        Box2 { x_lo: lo.x, x_hi: hi.x, y_lo: lo.y, y_hi: hi.y }
    }

    fn polylines(&self) -> Vec<&[Point]> {
        self.edges.iter().map(|e| e.polyline.as_slice()).collect()
    }

    /// Distance from `q` to edges not incident to vertex `id`.
    fn clearance(&self, id: usize, q: Point) -> f64 {
        self.edges
            .iter()
            .filter(|e| e.a != id && e.b != id)
            .flat_map(|e| e.polyline.windows(2))
            .map(|w| segment_distance(q, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den.abs() <= 1e-15 * r.norm() * s.norm() {
        // Parallel; overlapping collinear pieces count as touching.
        if (c - a).cross(r).abs() > 1e-12 * r.norm() {
            return None;
        }
        let t0 = (c - a).dot(r) / r.dot(r);
        let t1 = (d - a).dot(r) / r.dot(r);
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        return (hi >= 0.0 && lo <= 1.0).then(|| a + r * lo.clamp(0.0, 1.0));
    }
    let t = (c - a).cross(s) / den;
    let u = (c - a).cross(r) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| a + r * t)
}

fn segment_distance(q: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let l2 = d.dot(d);
    let t = if l2 == 0.0 { 0.0 } else { ((q - a).dot(d) / l2).clamp(0.0, 1.0) };
    q.dist(a + d * t)
}

/// Moves the upward edges of every branching vertex to a new vertex just
/// above it, joined to the original by a vertical segment.
pub fn split_vertices(g: &EmbeddedGraph, width: f64) -> Result<EmbeddedGraph> {
    let mut out = g.clone();
    let mut next_id = g.vertices.iter().map(|v| v.id).max().unwrap_or(0) + 1;
    for v in &g.vertices {
        let (i, o) = g.in_out(v.id);
        if i == 0 || o == 0 || i + o < 3 {
            continue;
        }
        let clearance = g.clearance(v.id, v.position());
        if clearance <= 2.0 * width {
            return Err(Error::ClearanceTooSmall(v.id));
        }
        let s = 0.5 * width.min(clearance);
        let vp = Point::new(v.x, v.y + s);
        let id = next_id;
        next_id += 1;
        out.vertices.push(GraphVertex { id, x: vp.x, y: vp.y });
        for e in out.edges.iter_mut().filter(|e| !e.joint) {
            if e.a == v.id && e.polyline[1].x > v.x {
                e.a = id;
                e.polyline[0] = vp;
            } else if e.b == v.id && e.polyline[e.polyline.len() - 2].x > v.x {
                e.b = id;
                *e.polyline.last_mut().unwrap() = vp;
            }
        }
        out.edges.push(GraphEdge { a: v.id, b: id, polyline: vec![v.position(), vp], joint: true });
    }
    out.validate()?;
    Ok(out)
}

fn polyline_distance(q: Point, line: &[Point]) -> f64 {
    line.windows(2).map(|w| segment_distance(q, w[0], w[1])).fold(f64::INFINITY, f64::min)
}

/// Distance to the drawing minus the tube half-width, with a soft minimum
/// across edges that rounds the concave corners where edges meet.
fn tube_field(lines: &[&[Point]], width: f64, q: Point) -> f64 {
    let tau = width / 4.0;
    let d: Vec<f64> = lines.iter().map(|l| polyline_distance(q, l)).collect();
    let m = d.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = d.iter().map(|&x| (-(x - m) / tau).exp()).sum();
    m - tau * s.ln() - width
}

/// Same zero set as the tube field but smooth across edge centre lines:
/// `(d^2 - width^2) / (2 width)`.
fn fit_target(phi: f64, width: f64) -> f64 {
    let d = (phi + width).max(0.0);
    (d * d - width * width) / (2.0 * width)
}

/// Chebyshev polynomials `T_0..=T_n` as monomial coefficient vectors.
fn chebyshev(n: usize) -> Vec<Poly1> {
    let mut t = vec![Poly1::new(vec![1.0]), Poly1::new(vec![0.0, 1.0])];
    while t.len() <= n {
        let k = t.len();
        let next = t[k - 1].mul(&Poly1::new(vec![0.0, 2.0])).add(&t[k - 2].scaled(-1.0));
        t.push(next);
    }
    t.truncate(n + 1);
    t
}

fn cheb_values(u: f64, n: usize) -> Vec<f64> {
    let mut v = vec![1.0, u];
    while v.len() <= n {
        let k = v.len();
        v.push(2.0 * u * v[k - 1] - v[k - 2]);
    }
    v.truncate(n + 1);
    v
}

/// Least-squares fit of the tube field in a total-degree Chebyshev basis
/// over `bbox`, returned in monomial form in the original coordinates.
fn fit_field(segs: &[&[Point]], width: f64, bbox: &Box2, degree: u32, resolution: usize) -> Result<Poly2> {
    let n = degree as usize;
    let index: Vec<(usize, usize)> = (0..=n).flat_map(|i| (0..=n - i).map(move |j| (i, j))).collect();
    let m = index.len();
    let c = bbox.center();
    let (hx, hy) = (0.5 * bbox.width(), 0.5 * bbox.height());
    let mut ata = DMatrix::<f64>::zeros(m, m);
    let mut atb = DVector::<f64>::zeros(m);
    let res = resolution.max(16);
    let mut row = vec![0.0; m];
    for iy in 0..res {
        for ix in 0..res {
            let q = Point::new(
                bbox.x_lo + (ix as f64 + 0.5) / res as f64 * bbox.width(),
                bbox.y_lo + (iy as f64 + 0.5) / res as f64 * bbox.height(),
            );
            let phi = tube_field(segs, width, q);
            // Dense near the boundary; elsewhere every 16th sample stands in
            // for its neighbours.
            let far = phi.abs() > 2.0 * width;
            if far && (ix % 4 != 0 || iy % 4 != 0) {
                continue;
            }
            // Accuracy matters most at the zero level.
            let wt = if far { 16.0 } else { 1.0 } / (0.1 + (phi / width).powi(2));
            let target = fit_target(phi, width);
            let tu = cheb_values((q.x - c.x) / hx, n);
            let tv = cheb_values((q.y - c.y) / hy, n);
            for (k, &(i, j)) in index.iter().enumerate() {
                row[k] = tu[i] * tv[j];
            }
            for a in 0..m {
                atb[a] += wt * row[a] * target;
                for b in a..m {
                    ata[(a, b)] += wt * row[a] * row[b];
                }
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            ata[(a, b)] = ata[(b, a)];
        }
    }
    let ridge = 1e-12 * ata.trace() / m as f64;
    for a in 0..m {
        ata[(a, a)] += ridge;
    }
    let coef = ata
        .cholesky()
        .map(|ch| ch.solve(&atb))
        .ok_or_else(|| Error::FitFailed("normal equations are not positive definite".into()))?;
    // Back to monomials in (u, v), then substitute u, v in terms of x, y.
    let t = chebyshev(n);
    let mut terms = Vec::new();
    for (k, &(i, j)) in index.iter().enumerate() {
        for (a, &ca) in t[i].coeffs().iter().enumerate() {
            for (b, &cb) in t[j].coeffs().iter().enumerate() {
                terms.push((a as u32, b as u32, coef[k] * ca * cb));
            }
        }
    }
    let in_uv = Poly2::from_terms(terms);
    let u = Poly2::from_terms([(1, 0, 1.0 / hx), (0, 0, -c.x / hx)]);
    let v = Poly2::from_terms([(0, 1, 1.0 / hy), (0, 0, -c.y / hy)]);
    let f = in_uv.compose(&u, &v);
    Ok(f.scaled(1.0 / f.scale()))
}

/// Box around the drawing with room for the tube and the carved circles.
pub fn realize_box(g: &EmbeddedGraph, width: f64) -> Box2 {
    let b = g.bbox();
    let m = 5.0 * width;
    Box2 { x_lo: b.x_lo - m, x_hi: b.x_hi + m, y_lo: b.y_lo - m, y_hi: b.y_hi + m }
}

/// A polynomial whose negative set is a tube around the drawing. The
/// degree starts at `spec.fit_degree` and grows by two until the fit passes
/// verification.
pub fn fit_tube_polynomial(g: &EmbeddedGraph, spec: &TubeSpec) -> Result<Poly2> {
    check_spec(g, spec)?;
    let mut last = None;
    for degree in (spec.fit_degree..=DEGREE_CAP).step_by(2) {
        match fit_at(g, spec, degree) {
            Ok(f) => return Ok(f),
            Err(e) => last = Some(e),
        }
    }
    Err(give_up(last))
}

fn give_up(last: Option<Error>) -> Error {
    match last {
        Some(Error::SingularFit) => Error::SingularFit,
        Some(e @ Error::PlacementFailed(_)) => e,
        Some(Error::FitFailed(m)) => Error::FitFailed(format!("degree cap {DEGREE_CAP} reached: {m}")),
        Some(e) => Error::FitFailed(format!("degree cap {DEGREE_CAP} reached: {e}")),
        None => Error::FitFailed(format!("starting degree exceeds the cap {DEGREE_CAP}")),
    }
}

fn fit_at(g: &EmbeddedGraph, spec: &TubeSpec, degree: u32) -> Result<Poly2> {
    let bbox = realize_box(g, spec.width);
    let f = fit_field(&g.polylines(), spec.width, &bbox, degree, spec.resolution)?;
    verify_fit(&f, g, spec, &bbox, seed_point(g, &[]))
        .map_err(|e| match e {
            Error::SingularFit => e,
            e => Error::FitFailed(format!("degree {degree}: {e}")),
        })
        .map(|()| f)
}

fn check_spec(g: &EmbeddedGraph, spec: &TubeSpec) -> Result<()> {
    if !(spec.width > 0.0) || spec.fit_degree < 2 || spec.resolution < 64 {
        return Err(Error::InvalidInput(format!("bad tube spec {spec:?}")));
    }
    // Non-adjacent edges must be further apart than the tube's diameter.
    let joined = |a: usize, b: usize| {
        a == b || g.edges.iter().any(|e| e.joint && ((e.a, e.b) == (a, b) || (e.a, e.b) == (b, a)))
    };
    for (i, e) in g.edges.iter().enumerate() {
        for f in &g.edges[i + 1..] {
            if [e.a, e.b].iter().any(|&v| joined(v, f.a) || joined(v, f.b)) {
                continue;
            }
            let d = e
                .polyline
                .windows(2)
                .flat_map(|s| f.polyline.windows(2).map(move |t| (s, t)))
                .map(|(s, t)| {
                    segment_distance(s[0], t[0], t[1])
                        .min(segment_distance(s[1], t[0], t[1]))
                        .min(segment_distance(t[0], s[0], s[1]))
                        .min(segment_distance(t[1], s[0], s[1]))
                })
                .fold(f64::INFINITY, f64::min);
            if d <= 2.0 * spec.width {
                return Err(Error::InvalidInput(format!(
                    "tube width {} exceeds half the separation {d} of edges {}-{} and {}-{}",
                    spec.width, e.a, e.b, f.a, f.b
                )));
            }
        }
    }
    Ok(())
}

fn verify_fit(f: &Poly2, g: &EmbeddedGraph, spec: &TubeSpec, bbox: &Box2, seed: Point) -> Result<()> {
    let segs = g.polylines();
    let w = spec.width;
    let res = 96;
    for iy in 0..res {
        for ix in 0..res {
            let q = Point::new(
                bbox.x_lo + (ix as f64 + 0.5) / res as f64 * bbox.width(),
                bbox.y_lo + (iy as f64 + 0.5) / res as f64 * bbox.height(),
            );
            let phi = tube_field(&segs, w, q);
            if phi.abs() > 0.3 * w && (phi < 0.0) != (f.eval(q) < 0.0) {
                return Err(Error::FitFailed(format!("sign of the fit is wrong at {q}")));
            }
        }
    }
    match check_nonsingular(f, bbox, 1e-10)? {
        Singularity::NonSingular => {}
        _ => return Err(Error::SingularFit),
    }
    let cells = spec.resolution;
    let tube = GridMask::from_fn(*bbox, cells, |q| tube_field(&segs, w, q) < 0.0);
    let scene = Scene::new(vec![f.clone()], *bbox, seed);
    let fitted = grid_mask(&scene, cells);
    let tol = 2.0 * bbox.width() / cells as f64;
    let a = reeb_of_mask(&tube, Axis::X);
    let b = reeb_of_mask(&fitted, Axis::X);
    if !homeomorphic(&a, &b, IsoMode::HeightOrder, tol)? {
        return Err(Error::FitFailed("the fitted tube has a different Reeb graph".into()));
    }
    Ok(())
}

/// A point on the drawing away from the given disks.
fn seed_point(g: &EmbeddedGraph, disks: &[Circle]) -> Point {
    let mut best = (f64::NEG_INFINITY, g.vertices[0].position());
    for e in g.edges.iter().filter(|e| !e.joint) {
        for w in e.polyline.windows(2) {
            for t in [0.5, 0.25, 0.75] {
                let p = w[0].lerp(w[1], t);
                let room = disks.iter().map(|c| p.dist(c.center) - c.radius).fold(f64::INFINITY, f64::min);
                let score = room.min(w[0].dist(w[1]));
                if score > best.0 {
                    best = (score, p);
                }
            }
        }
    }
    best.1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleRole {
    /// Carves a crotch so that the merge or split happens at the vertex height.
    Saddle,
    /// Slices off the end of the tube at a branch tip.
    Extremum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
    pub vertex: usize,
    pub role: CircleRole,
}

#[derive(Clone, Debug)]
pub struct Realized {
    pub domain: Domain,
    pub tube: Poly2,
    /// Degree at which the fit passed.
    pub degree: u32,
    pub split: EmbeddedGraph,
    pub circles: Vec<Circle>,
    /// X-poles of the tube boundary before carving.
    pub tube_poles: Vec<Point>,
    pub graph: VDigraph,
    pub realized_graph: VDigraph,
}

/// Realizes the drawing's V-digraph as the x-projection graph of a domain.
pub fn realize_domain(g: &EmbeddedGraph, spec: &TubeSpec) -> Result<Realized> {
    g.validate()?;
    let split = split_vertices(g, spec.width)?;
    check_spec(&split, spec)?;
    let bbox = realize_box(&split, spec.width);
    let mut last = None;
    // A placement failure can be an artefact of the fit, so it also moves
    // on to the next degree.
    for degree in (spec.fit_degree..=DEGREE_CAP).step_by(2) {
        match fit_at(&split, spec, degree).and_then(|f| place_circles(g, &split, &bbox, spec.width, f, degree)) {
            Ok(r) => return Ok(r),
            Err(e @ (Error::FitFailed(_) | Error::SingularFit | Error::PlacementFailed(_))) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(give_up(last))
}

fn place_circles(g: &EmbeddedGraph, split: &EmbeddedGraph, bbox: &Box2, w: f64, tube: Poly2, degree: u32) -> Result<Realized> {
    let seed = seed_point(split, &[]);
    let tube_domain = build_domain(&Scene::new(vec![tube.clone()], *bbox, seed))
        .map_err(|e| Error::FitFailed(format!("tube is not a valid domain: {e}")))?;
    let poles: Vec<Point> = tube_domain.poles[0].iter().filter(|p| p.on_closure).map(|p| p.point.location).collect();

    // Each pole belongs to the nearest extremal or branching vertex.
    let joint_of: BTreeMap<usize, usize> = split.edges.iter().filter(|e| e.joint).map(|e| (e.b, e.a)).collect();
    let mut extremal = Vec::new();
    let mut branching = Vec::new();
    for v in &g.vertices {
        let (i, o) = g.in_out(v.id);
        if i + o == 1 {
            extremal.push(v.id);
        } else if i >= 1 && o >= 1 && i + o >= 3 {
            branching.push(v.id);
        }
    }
    let expected = extremal.len()
        + branching
            .iter()
            .map(|&id| {
                let (i, o) = g.in_out(id);
                (i - 1) + (o - 1)
            })
            .sum::<usize>();
    if poles.len() != expected {
        return Err(Error::FitFailed(format!("tube has {} x-poles, expected {expected}", poles.len())));
    }
    let anchor = |id: usize| -> Vec<Point> {
        let mut pts = vec![split.vertex(id).unwrap().position()];
        pts.extend(joint_of.iter().filter(|(_, &a)| a == id).map(|(&b, _)| split.vertex(b).unwrap().position()));
        pts
    };
    let centroid = {
        let n = g.vertices.len() as f64;
        let s = g.vertices.iter().fold(Point::new(0.0, 0.0), |acc, v| acc + v.position());
        Point::new(s.x / n, s.y / n)
    };
    let mut circles = Vec::new();
    let mut seen: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for &p in &poles {
        let owner = extremal
            .iter()
            .chain(&branching)
            .map(|&id| (id, anchor(id).iter().map(|a| a.dist(p)).fold(f64::INFINITY, f64::min)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::PlacementFailed("no vertex for a pole".into()))?;
        let v = g.vertex(owner.0).unwrap().position();
        if owner.1 > 4.0 * w {
            return Err(Error::PlacementFailed(format!("pole {p} is far from every vertex")));
        }
        if extremal.contains(&owner.0) {
            circles.push(end_cut(&tube, owner.0, v, p, w, centroid)?);
        } else {
            let e = seen.entry(owner.0).or_default();
            if p.x < v.x {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
            let r = (v.x - p.x).abs();
            if r <= 1e-9 {
                return Err(Error::PlacementFailed(format!("crotch pole {p} sits at the vertex height")));
            }
            // A deeper crotch would let the disk cut through the branches.
            if r > 1.5 * w {
                return Err(Error::PlacementFailed(format!(
                    "crotch at vertex {} is {r} deep; the branches must leave it more steeply",
                    owner.0
                )));
            }
            circles.push(Circle { center: p, radius: r, vertex: owner.0, role: CircleRole::Saddle });
        }
    }
    for &id in &branching {
        let (i, o) = g.in_out(id);
        if seen.get(&id).copied().unwrap_or_default() != (i - 1, o - 1) {
            return Err(Error::FitFailed(format!("crotch poles of vertex {id} do not match its degrees")));
        }
    }
    for (k, a) in circles.iter().enumerate() {
        for b in &circles[k + 1..] {
            if a.center.dist(b.center) <= a.radius + b.radius {
                return Err(Error::PlacementFailed(format!("disks at vertices {} and {} overlap", a.vertex, b.vertex)));
            }
        }
        if a.center.x - a.radius <= bbox.x_lo || a.center.x + a.radius >= bbox.x_hi || a.center.y - a.radius <= bbox.y_lo || a.center.y + a.radius >= bbox.y_hi {
            return Err(Error::PlacementFailed(format!("disk at vertex {} leaves the box", a.vertex)));
        }
    }
    let seed = seed_point(split, &circles);
    if circles.iter().any(|c| seed.dist(c.center) <= c.radius) {
        return Err(Error::PlacementFailed("no seed point outside the disks".into()));
    }
    let mut curves = vec![tube.clone()];
    curves.extend(circles.iter().map(|c| Poly2::circle(c.center, c.radius)));
    let domain = build_domain(&Scene::new(curves, *bbox, seed)).map_err(|e| Error::PlacementFailed(e.to_string()))?;
    if !domain.classify_morse().morse {
        return Err(Error::PlacementFailed("realized domain is not Morse".into()));
    }
    let graph = g.to_vdigraph();
    let realized_graph = poincare_reeb(&domain, Axis::X)?;
    let tol = 1e-9 * bbox.width();
    if !homeomorphic(&graph, &realized_graph, IsoMode::HeightOrder, tol)? {
        return Err(Error::GraphMismatch);
    }
    Ok(Realized { domain, tube, degree, split: split.clone(), circles, tube_poles: poles, graph, realized_graph })
}

/// A large circle slicing the end cap of the tube at a tip `v` along a
/// diagonal chord, so that no point of the new arc has a vertical tangent.
fn end_cut(tube: &Poly2, id: usize, v: Point, pole: Point, w: f64, centroid: Point) -> Result<Circle> {
    use std::f64::consts::{FRAC_PI_4, PI};
    let wrap = |a: f64| (a + PI).rem_euclid(2.0 * PI) - PI;
    let to_pole = (pole - v).angle();
    // The arc faces back toward `v` along a diagonal; the disk goes toward
    // the pole, preferably away from the rest of the graph.
    let outward = (v - centroid).angle();
    let score = |f: f64| wrap(f + PI - to_pole).abs() - 0.6 * (f + PI - outward).cos();
    let facing = [FRAC_PI_4, 3.0 * FRAC_PI_4, -FRAC_PI_4, -3.0 * FRAC_PI_4]
        .into_iter()
        .min_by(|&x, &y| score(x).total_cmp(&score(y)))
        .unwrap();
    let base = facing + PI;
    let spread = wrap(to_pole - base).abs() + 10f64.to_radians();
    let hit = |a: f64| -> Result<Point> {
        let u = Point::new(a.cos(), a.sin());
        let r = tube.restrict_affine(v, u);
        let roots = isolate_univariate_roots(&r, 0.0, 3.0 * w, 1e-12)
            .map_err(|e| Error::PlacementFailed(format!("tube boundary near vertex {id}: {e}")))?;
        let t = roots.first().ok_or_else(|| Error::PlacementFailed(format!("no tube boundary near vertex {id}")))?.mid();
        Ok(v + u * t)
    };
    let a = hit(base - spread)?;
    let b = hit(base + spread)?;
    let chord = b - a;
    let half = 0.5 * chord.norm();
    let radius = 2.5 * half;
    let mid = a.lerp(b, 0.5);
    let mut n = chord.perp().normalized();
    if n.dot(v - mid) > 0.0 {
        n = -n;
    }
    let center = mid + n * (radius * radius - half * half).sqrt();
    if center.dist(pole) >= radius {
        return Err(Error::PlacementFailed(format!("end cut at vertex {id} misses the pole")));
    }
    // The arc between the contacts must avoid both x-poles of the circle.
    let (ta, tb) = ((a - center).angle(), (b - center).angle());
    let sweep = wrap(tb - ta);
    if [0.0, PI].iter().any(|&pole_angle| {
        let t = wrap(pole_angle - ta) / sweep;
        (0.0..=1.0).contains(&t)
    }) {
        return Err(Error::PlacementFailed(format!("end cut at vertex {id} has a vertical tangent")));
    }
    Ok(Circle { center, radius, vertex: id, role: CircleRole::Extremum })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> EmbeddedGraph {
        EmbeddedGraph::straight(&[Point::new(-1.0, 0.0), Point::new(1.0, 0.0)], &[(0, 1)]).unwrap()
    }

    fn cycle() -> EmbeddedGraph {
        let mut g = EmbeddedGraph::straight(
            &[Point::new(-1.0, 0.0), Point::new(-0.5, 0.0), Point::new(0.5, 0.0), Point::new(1.0, 0.0)],
            &[(0, 1), (1, 2), (1, 2), (2, 3)],
        )
        .unwrap();
        // Upper and lower halves of the circle of radius 0.5.
        let arc = |sign: f64| {
            (0..=32)
                .map(|k| {
                    let a = std::f64::consts::PI * (1.0 - k as f64 / 32.0);
                    Point::new(0.5 * a.cos(), sign * 0.5 * a.sin())
                })
                .collect::<Vec<_>>()
        };
        g.edges[1].polyline = arc(1.0);
        g.edges[2].polyline = arc(-1.0);
        g.validate().unwrap();
        g
    }

    /// Root at height -1, branch at 0, tips at 1; the branches leave the
    /// fork steeply along quarter circles.
    fn y_graph() -> EmbeddedGraph {
        let mut g = EmbeddedGraph::straight(
            &[Point::new(-1.0, 0.0), Point::new(0.0, 0.0), Point::new(1.0, 0.5), Point::new(1.0, -0.5)],
            &[(0, 1), (1, 2), (1, 3)],
        )
        .unwrap();
        let branch = |sign: f64| {
            let mut pts: Vec<Point> = (0..=16)
                .map(|k| {
                    let a = std::f64::consts::FRAC_PI_2 * k as f64 / 16.0;
                    Point::new(0.5 * (1.0 - a.cos()), sign * 0.5 * a.sin())
                })
                .collect();
            pts.push(Point::new(1.0, sign * 0.5));
            pts
        };
        g.edges[1].polyline = branch(1.0);
        g.edges[2].polyline = branch(-1.0);
        g.validate().unwrap();
        g
    }

    #[test]
    fn json_round_trip() {
        let g = cycle();
        let back = EmbeddedGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert!(EmbeddedGraph::from_json(r#"{"vertices":[{"id":0,"x":0,"y":0}],"edges":[{"a":0,"b":0}]}"#).is_err());
    }

    #[test]
    fn rejects_bad_drawings() {
        let p = [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(EmbeddedGraph::straight(&p, &[(0, 1), (2, 3)]).is_err());
        let q = [Point::new(0.0, 0.0), Point::new(0.0, 1.0)];
        assert!(EmbeddedGraph::straight(&q, &[(0, 1)]).is_err());
    }

    #[test]
    fn vdigraph_of_a_cycle() {
        let v = cycle().to_vdigraph();
        assert_eq!(v.betti1(), 1);
        assert_eq!(v.in_degree(1), 1);
        assert_eq!(v.out_degree(1), 2);
    }

    #[test]
    fn split_moves_upward_edges() {
        let s = split_vertices(&y_graph(), 0.1).unwrap();
        assert_eq!(s.vertices.len(), 5);
        assert_eq!(s.edges.iter().filter(|e| e.joint).count(), 1);
        assert!(homeomorphic(&s.to_vdigraph(), &y_graph().to_vdigraph(), IsoMode::ExactHeight, 1e-12).unwrap());
        // The edge from vertex 4 passes just above vertex 1.
        let json = r#"{"vertices":[{"id":0,"x":-1,"y":0},{"id":1,"x":0,"y":0},{"id":2,"x":1,"y":0.5},
            {"id":3,"x":1,"y":-0.5},{"id":4,"x":-0.8,"y":0.08},{"id":5,"x":2,"y":0.5}],
            "edges":[{"a":0,"b":1},{"a":1,"b":2},{"a":1,"b":3},{"a":2,"b":5},
            {"a":4,"b":2,"polyline":[[-0.8,0.08],[0.0,0.08]]}]}"#;
        let tight = EmbeddedGraph::from_json(json).unwrap();
        assert!(matches!(split_vertices(&tight, 0.1), Err(Error::ClearanceTooSmall(1))));
    }

    #[test]
    fn realizes_a_path() {
        let r = realize_domain(&path(), &TubeSpec::default()).unwrap();
        assert_eq!(r.realized_graph.suppress_pass_through().vertices.len(), 2);
        assert_eq!(r.circles.len(), 2);
        assert_eq!(r.tube_poles.len(), 2);
    }

    #[test]
    fn realizes_a_cycle() {
        let r = realize_domain(&cycle(), &TubeSpec::default()).unwrap();
        assert_eq!(r.realized_graph.betti1(), 1);
        assert_eq!(r.tube_poles.len(), 4);
        assert!(homeomorphic(&r.graph, &r.realized_graph, IsoMode::HeightOrder, 1e-9).unwrap());
    }

    #[test]
    fn realizes_a_y() {
        let r = realize_domain(&y_graph(), &TubeSpec::default()).unwrap();
        assert!(r.domain.classify_morse().morse);
        assert_eq!(r.tube_poles.len(), 4);
        assert_eq!(r.circles.iter().filter(|c| c.role == CircleRole::Saddle).count(), 1);
        assert_eq!(r.realized_graph.suppress_pass_through().vertices.len(), 4);
    }
}
