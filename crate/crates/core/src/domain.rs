//! Refined algebraic domains: validation, membership, characteristic sets and
//! the genericity predicates.
//!
//! Membership and topology come from a cylindrical decomposition per axis.
//! Stations are placed at every pole, crossing and box-edge hit; between
//! stations the fiber roots of all curves keep their order, so the cells of a
//! slab are indexed by root position. Cells of adjacent slabs are glued
//! across a station when their limit segments on the station line overlap.

use serde::{Deserialize, Serialize};

use crate::curvegeo::{
    check_nonsingular, find_bitangents, find_curvature_vertices_all, find_inflections_all, find_poles_all, trace_indexed,
    Bitangent, CharKind, CharPoint, Curve, Polyline, Singularity,
};
use crate::error::{Error, Result};
use crate::geom::{Axis, Box2, Point};
use crate::interval::Interval;
use crate::poly::Poly2;
use crate::roots::{isolate_roots_lenient, isolate_univariate_roots};
use crate::systems::{solve_system_lenient, PolySystem2, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Residual tolerance of the polynomial system solver (relative to coefficient scale).
    pub solver: f64,
    /// Curve tracing step.
    pub trace_step: f64,
    /// Width of fiber root intervals.
    pub fiber: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { solver: 1e-10, trace_step: 0.01, fiber: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub curves: Vec<Poly2>,
    #[serde(rename = "box")]
    pub bbox: Box2,
    pub seed: Point,
    #[serde(default)]
    pub tol: Tolerances,
}

impl Scene {
    pub fn new(curves: Vec<Poly2>, bbox: Box2, seed: Point) -> Self {
        Scene { curves, bbox, seed, tol: Tolerances::default() }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let scene: Scene = serde_json::from_str(s)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.curves.is_empty() {
            return Err(Error::InvalidInput("scene has no curves".into()));
        }
        let t = &self.tol;
        if !(t.solver > 0.0 && t.trace_step > 0.0 && t.fiber > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if !self.bbox.strictly_contains(self.seed) {
            return Err(Error::OutsideBox(self.seed));
        }
        for f in &self.curves {
            if on_curve(f, self.seed, t.solver) {
                return Err(Error::OnCurve(self.seed));
            }
        }
        Ok(())
    }

    /// Largest coordinate magnitude of the box, at least 1.
    pub fn length_scale(&self) -> f64 {
        [self.bbox.x_lo, self.bbox.x_hi, self.bbox.y_lo, self.bbox.y_hi]
            .iter()
            .fold(1.0f64, |m, v| m.max(v.abs()))
    }
}

fn on_curve(f: &Poly2, q: Point, tol: f64) -> bool {
    f.eval(q).abs() <= tol * f.magnitude_at(q).max(1.0)
}

/// A characteristic point together with its closure verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Located {
    pub point: CharPoint,
    pub on_closure: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub curve: usize,
    pub points: Vec<Point>,
    pub closed: bool,
}

#[derive(Clone, Debug)]
pub struct Domain {
    pub scene: Scene,
    pub curves: Vec<Curve>,
    /// All pairwise transversal crossings in the box.
    pub crossings: Vec<Located>,
    /// All poles in the box, per axis (index 0: X, 1: Y).
    pub poles: [Vec<Located>; 2],
    pub boundary_arcs: Vec<BoundaryArc>,
    pub warnings: Vec<String>,
    sweeps: [Sweep; 2],
}

pub(crate) fn axis_index(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
    }
}

/// Validate a scene and build its domain.
pub fn build_domain(scene: &Scene) -> Result<Domain> {
    scene.validate()?;
    let tol = scene.tol;
    let mut warnings = Vec::new();
    let mut curves = Vec::with_capacity(scene.curves.len());
    for (k, f) in scene.curves.iter().enumerate() {
        match check_nonsingular(f, &scene.bbox, tol.solver)? {
            Singularity::NonSingular => {}
            Singularity::SingularAt(at) => return Err(Error::SingularCurve { index: k, at }),
            Singularity::EmptyZeroSet => return Err(Error::CurveMissesClosure(k)),
        }
        curves.push(trace_indexed(f, &scene.bbox, tol.trace_step, k)?);
    }

    let mut poles: [Vec<CharPoint>; 2] = [Vec::new(), Vec::new()];
    for axis in Axis::both() {
        for c in &curves {
            for p in find_poles_all(c, axis, tol.solver)? {
                if !c.bbox.strictly_contains(p.location) || c.bbox.boundary_distance(p.location) <= c.margin() {
                    warnings.push(format!("pole of curve {} near the box edge at {} ignored", c.index, p.location));
                }
                poles[axis_index(axis)].push(p);
            }
        }
    }

    let (crossings, tangential) = all_crossings(&curves, &scene.bbox, tol.solver)?;
    let sweeps = [
        Sweep::build(Axis::X, scene, &curves, &poles[0], &crossings, &tangential)?,
        Sweep::build(Axis::Y, scene, &curves, &poles[1], &crossings, &tangential)?,
    ];

    let mut domain = Domain {
        scene: scene.clone(),
        curves,
        crossings: Vec::new(),
        poles: [Vec::new(), Vec::new()],
        boundary_arcs: Vec::new(),
        warnings,
        sweeps,
    };
    if domain.sweeps.iter().any(|s| s.unbounded()) {
        return Err(Error::UnboundedDomain);
    }
    for t in &tangential {
        if domain.closure_contains_point(t.location)? {
            let (a, b) = (t.curves[0], t.curves[1]);
            return Err(Error::TangentialCrossing { a, b, at: t.location });
        }
    }
    let mut located = Vec::new();
    for c in crossings {
        let on = domain.sweeps[0].event_on_closure(&c).unwrap_or(false);
        located.push(Located { point: c, on_closure: on });
    }
    check_triple_points(&located, tol.solver * scene.length_scale())?;
    domain.crossings = located;
    for axis in Axis::both() {
        let sweep = &domain.sweeps[axis_index(axis)];
        domain.poles[axis_index(axis)] = std::mem::take(&mut poles[axis_index(axis)])
            .into_iter()
            .map(|p| {
                let on = sweep.event_on_closure(&p).unwrap_or(false);
                Located { point: p, on_closure: on }
            })
            .collect();
    }
    for k in 0..domain.curves.len() {
        if !domain.sweeps[0].curve_bounds_domain(k) {
            return Err(Error::CurveMissesClosure(k));
        }
    }
    domain.boundary_arcs = domain.trace_boundary()?;
    Ok(domain)
}

fn check_triple_points(crossings: &[Located], eps: f64) -> Result<()> {
    let eps = 10.0 * eps.max(1e-12);
    for (i, a) in crossings.iter().enumerate() {
        for b in &crossings[i + 1..] {
            if a.point.curves != b.point.curves && a.point.location.dist(b.point.location) <= eps {
                return Err(Error::TriplePoint(a.point.location));
            }
        }
    }
    Ok(())
}

/// Transversal crossings, and tangential contacts, of all curve pairs.
fn all_crossings(curves: &[Curve], bbox: &Box2, tol: f64) -> Result<(Vec<CharPoint>, Vec<CharPoint>)> {
    let mut out = Vec::new();
    let mut tangential = Vec::new();
    for (i, a) in curves.iter().enumerate() {
        for b in &curves[i + 1..] {
            let sys = PolySystem2::new(a.poly().clone(), b.poly().clone());
            let scale = a.poly().scale().max(b.poly().scale()).max(1.0);
            let sols = solve_system_lenient(&sys, &[bbox.xs(), bbox.ys()], &SolveOptions::with_tol(tol * scale))?;
            for s in &sols.regular {
                let p = s.point();
                let (ga, gb) = (a.d.grad(p), b.d.grad(p));
                let cp = CharPoint {
                    kind: CharKind::Crossing,
                    location: p,
                    curves: vec![a.index, b.index],
                    radius: s.radius,
                    residual: s.residual,
                };
                if ga.cross(gb).abs() <= 1e-8 * ga.norm() * gb.norm() {
                    tangential.push(cp);
                } else {
                    out.push(cp);
                }
            }
            for s in &sols.degenerate {
                tangential.push(CharPoint {
                    kind: CharKind::Crossing,
                    location: s.point(),
                    curves: vec![a.index, b.index],
                    radius: s.radius,
                    residual: s.residual,
                });
            }
        }
    }
    Ok((out, tangential))
}

/// Sorted roots of all curves on the line `{axis = t}` within `range`.
#[derive(Clone, Debug, Default)]
pub(crate) struct FiberRoots {
    pub us: Vec<f64>,
    pub curves: Vec<usize>,
}

pub(crate) fn fiber_roots(curves: &[Curve], axis: Axis, t: f64, range: Interval, tol: f64) -> Result<FiberRoots> {
    let mut all: Vec<(f64, usize)> = Vec::new();
    let rtol = tol * range.mag().max(1.0);
    for c in curves {
        let r = c.poly().restrict_to_line(axis, t);
        if r.degree() == 0 {
            continue;
        }
        let roots = isolate_univariate_roots(&r, range.lo, range.hi, rtol).or_else(|e| match e {
            Error::ToleranceTooCoarse { .. } => isolate_roots_lenient(&r, range.lo, range.hi, rtol),
            e => Err(e),
        })?;
        all.extend(roots.iter().map(|ri| (ri.mid(), c.index)));
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(FiberRoots { us: all.iter().map(|r| r.0).collect(), curves: all.iter().map(|r| r.1).collect() })
}

/// Closed index range `[a, b]` into a station's anchor list.
pub(crate) type Range = (usize, usize);

#[derive(Clone, Debug)]
pub(crate) struct Station {
    pub t: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub anchors: Vec<f64>,
    /// Characteristic events at this station with their anchor index.
    pub events: Vec<(CharPoint, usize)>,
}

#[derive(Clone, Debug)]
pub(crate) struct Slab {
    pub t_lo: f64,
    pub t_hi: f64,
    pub mid: FiberRoots,
    /// Per cell, the limit range on the left station (absent for the first slab).
    pub left: Vec<Range>,
    pub right: Vec<Range>,
}

impl Slab {
    pub fn cells(&self) -> usize {
        self.mid.us.len() + 1
    }

}

#[derive(Clone, Debug)]
pub(crate) struct Sweep {
    pub axis: Axis,
    pub range: Interval,
    pub across: Interval,
    pub stations: Vec<Station>,
    pub slabs: Vec<Slab>,
    /// Component label per slab per cell.
    pub comp: Vec<Vec<usize>>,
    pub domain_comp: usize,
    pub fiber_tol: f64,
    curves: Vec<Curve>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut k = i;
        while self.0[k] != r {
            let n = self.0[k];
            self.0[k] = r;
            k = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl Sweep {
    fn build(
        axis: Axis,
        scene: &Scene,
        curves: &[Curve],
        poles: &[CharPoint],
        crossings: &[CharPoint],
        tangential: &[CharPoint],
    ) -> Result<Sweep> {
        let range = scene.bbox.range(axis);
        let across = scene.bbox.range(axis.other());
        let scale = scene.length_scale();
        let merge = 10.0 * scene.tol.solver * scale;
        let fiber_tol = scene.tol.fiber;

        // Event coordinates: characteristic points and box-edge hits.
        let mut evs: Vec<(f64, Option<CharPoint>)> = Vec::new();
        for p in poles.iter().chain(crossings).chain(tangential) {
            evs.push((p.location.coord(axis), Some(p.clone())));
        }
        for c in curves {
            for u in [across.lo, across.hi] {
                let r = c.poly().restrict_to_line(axis.other(), u);
                if r.degree() <= 0 {
                    continue;
                }
                for ri in isolate_roots_lenient(&r, range.lo, range.hi, fiber_tol * scale)? {
                    evs.push((ri.mid(), None));
                }
            }
        }
        let edge_eps = 1e-9 * scale;
        evs.retain(|(t, _)| *t > range.lo + edge_eps && *t < range.hi - edge_eps);
        evs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut groups: Vec<Vec<(f64, Option<CharPoint>)>> = Vec::new();
        for e in evs {
            match groups.last_mut() {
                Some(g) if e.0 - g.last().unwrap().0 <= merge => g.push(e),
                _ => groups.push(vec![e]),
            }
        }

        let mut stations = Vec::with_capacity(groups.len());
        for g in groups {
            let t_lo = g.first().unwrap().0;
            let t_hi = g.last().unwrap().0;
            let t = 0.5 * (t_lo + t_hi);
            let mut anchors = vec![across.lo, across.hi];
            for c in curves {
                let r = c.poly().restrict_to_line(axis, t);
                if r.degree() <= 0 {
                    if r.is_zero() {
                        return Err(Error::IdenticallyZero);
                    }
                    continue;
                }
                for ri in isolate_roots_lenient(&r, across.lo, across.hi, fiber_tol * scale)? {
                    anchors.push(ri.mid());
                }
            }
            let evpts: Vec<CharPoint> = g.into_iter().filter_map(|e| e.1).collect();
            anchors.extend(evpts.iter().map(|p| p.location.other(axis)));
            anchors.sort_by(f64::total_cmp);
            let anchor_merge = 1e-7 * scale;
            let mut merged: Vec<f64> = Vec::new();
            for a in anchors {
                match merged.last() {
                    Some(&l) if a - l <= anchor_merge => {}
                    _ => merged.push(a),
                }
            }
            // Keep the box edges exact.
            *merged.first_mut().unwrap() = across.lo;
            *merged.last_mut().unwrap() = across.hi;
            let events = evpts
                .into_iter()
                .map(|p| {
                    let u = p.location.other(axis);
                    (p, nearest(&merged, u))
                })
                .collect();
            stations.push(Station { t, t_lo, t_hi, anchors: merged, events });
        }

        let mut slabs = Vec::with_capacity(stations.len() + 1);
        for k in 0..=stations.len() {
            let t_lo = if k == 0 { range.lo } else { stations[k - 1].t_hi };
            let t_hi = if k == stations.len() { range.hi } else { stations[k].t_lo };
            let tm = 0.5 * (t_lo + t_hi);
            let mid = fiber_roots(curves, axis, tm, across, fiber_tol)?;
            let gap = t_hi - t_lo;
            let eps = (1e-9 * scale).min(0.01 * gap);
            let mut left = Vec::new();
            let mut right = Vec::new();
            if k > 0 {
                let st = &stations[k - 1];
                let f = fiber_roots(curves, axis, t_lo + eps, across, fiber_tol)?;
                left = limit_ranges(&f, &mid, st)?;
            }
            if k < stations.len() {
                let st = &stations[k];
                let f = fiber_roots(curves, axis, t_hi - eps, across, fiber_tol)?;
                right = limit_ranges(&f, &mid, st)?;
            }
            slabs.push(Slab { t_lo, t_hi, mid, left, right });
        }

        // Label cells by connectivity across stations.
        let offsets: Vec<usize> = slabs
            .iter()
            .scan(0usize, |acc, s| {
                let o = *acc;
                *acc += s.cells();
                Some(o)
            })
            .collect();
        let total: usize = slabs.iter().map(|s| s.cells()).sum();
        let mut uf = UnionFind((0..total).collect());
        for k in 0..stations.len() {
            let (l, r) = (&slabs[k], &slabs[k + 1]);
            for (i, a) in l.right.iter().enumerate() {
                for (j, b) in r.left.iter().enumerate() {
                    if a.0.max(b.0) < a.1.min(b.1) {
                        uf.union(offsets[k] + i, offsets[k + 1] + j);
                    }
                }
            }
        }
        let comp: Vec<Vec<usize>> =
            slabs.iter().enumerate().map(|(k, s)| (0..s.cells()).map(|c| uf.find(offsets[k] + c)).collect()).collect();

        let mut sweep = Sweep {
            axis,
            range,
            across,
            stations,
            slabs,
            comp,
            domain_comp: usize::MAX,
            fiber_tol,
            curves: curves.to_vec(),
        };
        let (k, c) = sweep.locate(scene.seed)?;
        sweep.domain_comp = sweep.comp[k][c];
        Ok(sweep)
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn in_domain(&self, slab: usize, cell: usize) -> bool {
        self.comp[slab][cell] == self.domain_comp
    }

    fn unbounded(&self) -> bool {
        let last = self.slabs.len() - 1;
        self.slabs.iter().enumerate().any(|(k, s)| {
            (0..s.cells()).any(|c| self.in_domain(k, c) && (k == 0 || k == last || c == 0 || c == s.cells() - 1))
        })
    }

    /// Some domain cell is bounded by a root of curve `k`.
    fn curve_bounds_domain(&self, k: usize) -> bool {
        self.slabs.iter().enumerate().any(|(si, s)| {
            s.mid.curves.iter().enumerate().any(|(r, &c)| c == k && (self.in_domain(si, r) || self.in_domain(si, r + 1)))
        })
    }

    fn slab_of(&self, t: f64) -> Option<usize> {
        self.slabs.iter().position(|s| s.t_lo < t && t < s.t_hi)
    }

    /// Slab and cell of a point that lies off every curve.
    pub fn locate(&self, q: Point) -> Result<(usize, usize)> {
        let mut t = q.coord(self.axis);
        let u = q.other(self.axis);
        if self.slab_of(t).is_none() {
            // On a station line: shift along the sweep by less than the
            // distance to the nearest curve and to the next station.
            let dist = self
                .curves
                .iter()
                .map(|c| c.poly().eval(q).abs() / c.d.grad(q).norm().max(1e-300))
                .fold(f64::INFINITY, f64::min);
            let gap = self
                .slabs
                .iter()
                .find(|s| s.t_lo >= t)
                .map(|s| s.t_hi - s.t_lo)
                .unwrap_or(0.0);
            t += (0.1 * dist).min(0.25 * gap);
        }
        let Some(k) = self.slab_of(t) else {
            return Err(Error::MembershipUndecided(q));
        };
        let roots = fiber_roots(&self.curves, self.axis, t, self.across, self.fiber_tol)?;
        if roots.us.len() != self.slabs[k].mid.us.len() {
            return Err(Error::MembershipUndecided(q));
        }
        let w = self.fiber_tol * self.across.mag().max(1.0);
        if roots.us.iter().any(|r| (r - u).abs() <= w) {
            return Err(Error::OnCurve(q));
        }
        Ok((k, roots.us.iter().filter(|&&r| r < u).count()))
    }

    /// Whether a station event lies on the closure of the domain.
    fn event_on_closure(&self, p: &CharPoint) -> Option<bool> {
        let (si, st) = self.stations.iter().enumerate().find(|(_, s)| s.events.iter().any(|(e, _)| e == p))?;
        let a = st.events.iter().find(|(e, _)| e == p)?.1;
        Some(self.station_cells(si).iter().any(|&(_, _, r)| r.0 <= a && a <= r.1))
    }

    /// Domain cells adjacent to station `si`: (slab, cell, limit range).
    pub fn station_cells(&self, si: usize) -> Vec<(usize, usize, Range)> {
        let mut out = Vec::new();
        let l = si;
        for (c, r) in self.slabs[l].right.iter().enumerate() {
            if self.in_domain(l, c) {
                out.push((l, c, *r));
            }
        }
        let rr = si + 1;
        for (c, r) in self.slabs[rr].left.iter().enumerate() {
            if self.in_domain(rr, c) {
                out.push((rr, c, *r));
            }
        }
        out
    }

    fn station_near(&self, t: f64, eps: f64) -> Option<usize> {
        self.stations.iter().position(|s| s.t_lo - eps <= t && t <= s.t_hi + eps)
    }
}

fn nearest(sorted: &[f64], u: f64) -> usize {
    let mut best = 0;
    for (i, a) in sorted.iter().enumerate() {
        if (a - u).abs() < (sorted[best] - u).abs() {
            best = i;
        }
    }
    best
}

/// Map each cell of a near-station fiber to the anchor range it tends to.
fn limit_ranges(f: &FiberRoots, mid: &FiberRoots, st: &Station) -> Result<Vec<Range>> {
    if f.us.len() != mid.us.len() || f.curves != mid.curves {
        return Err(Error::SweepMatchingAmbiguous(st.t));
    }
    let idx: Vec<usize> = f.us.iter().map(|&u| nearest(&st.anchors, u)).collect();
    if idx.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::SweepMatchingAmbiguous(st.t));
    }
    let last = st.anchors.len() - 1;
    let n = idx.len();
    Ok((0..=n)
        .map(|c| {
            let a = if c == 0 { 0 } else { idx[c - 1] };
            let b = if c == n { last } else { idx[c] };
            (a, b)
        })
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub morse: bool,
    pub g_morse: bool,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub reason: String,
    pub location: Point,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagOptions {
    /// Only count boundary points of the curve that owns the double tangent.
    pub ndtl_same_curve_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NdtlWitness {
    pub point: Point,
    /// Curve the boundary point lies on.
    pub curve: usize,
    pub bitangent: Bitangent,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlagReport {
    pub nip: bool,
    pub ndtl: bool,
    pub ncv: bool,
    pub inflections: Vec<CharPoint>,
    pub ndtl_witnesses: Vec<NdtlWitness>,
    pub curvature_vertices: Vec<CharPoint>,
}

impl Domain {
    pub(crate) fn sweep(&self, axis: Axis) -> &Sweep {
        &self.sweeps[axis_index(axis)]
    }

    fn tol(&self) -> f64 {
        self.scene.tol.solver
    }

    /// Membership of a point off the curves.
    pub fn contains_point(&self, q: Point) -> Result<bool> {
        if !self.scene.bbox.contains(q) {
            return Err(Error::OutsideBox(q));
        }
        for f in &self.scene.curves {
            if on_curve(f, q, self.tol()) {
                return Err(Error::OnCurve(q));
            }
        }
        let mut last = Error::MembershipUndecided(q);
        for axis in Axis::both() {
            match self.sweep(axis).locate(q) {
                Ok((k, c)) => return Ok(self.sweep(axis).in_domain(k, c)),
                Err(e @ Error::OnCurve(_)) => return Err(e),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    /// Whether a point of the curves lies on the closure of the domain.
    pub fn closure_contains_point(&self, q: Point) -> Result<bool> {
        let sw = self.sweep(Axis::X);
        let scale = self.scene.length_scale();
        let t = q.coord(Axis::X);
        let u = q.other(Axis::X);
        let mut ts = Vec::new();
        let st_eps = 1e-8 * scale;
        if let Some(si) = sw.station_near(t, st_eps) {
            let st = &sw.stations[si];
            let l = &sw.slabs[si];
            let r = &sw.slabs[si + 1];
            let dl = (1e-8 * scale).min(0.25 * (l.t_hi - l.t_lo));
            let dr = (1e-8 * scale).min(0.25 * (r.t_hi - r.t_lo));
            ts.push((st.t_lo - dl, si));
            ts.push((st.t_hi + dr, si + 1));
        } else if let Some(k) = sw.slab_of(t) {
            ts.push((t, k));
        } else {
            return Err(Error::ClosureMembershipUndecided(q));
        }
        // Curves passing through q, by first-order distance.
        let rho = 1e-6 * scale;
        let through: Vec<usize> = self
            .curves
            .iter()
            .filter(|c| c.poly().eval(q).abs() <= rho * c.d.grad(q).norm())
            .map(|c| c.index)
            .collect();
        if through.is_empty() {
            return self.contains_point(q);
        }
        for (tt, k) in ts {
            let roots = fiber_roots(&self.curves, Axis::X, tt, sw.across, sw.fiber_tol)?;
            if roots.us.len() != sw.slabs[k].mid.us.len() {
                return Err(Error::ClosureMembershipUndecided(q));
            }
            for &c in &through {
                let nearest = (0..roots.us.len())
                    .filter(|&i| roots.curves[i] == c)
                    .min_by(|&a, &b| (roots.us[a] - u).abs().total_cmp(&(roots.us[b] - u).abs()));
                // Near a pole the curve may leave this side of the station.
                let Some(i) = nearest.filter(|&i| (roots.us[i] - u).abs() <= 1e-4 * scale) else { continue };
                if sw.in_domain(k, i) || sw.in_domain(k, i + 1) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Crossings on the closure and the poles of `axis` on the boundary.
    pub fn characteristic_set(&self, axis: Axis) -> Vec<CharPoint> {
        let mut out: Vec<CharPoint> =
            self.crossings.iter().filter(|c| c.on_closure).map(|c| c.point.clone()).collect();
        out.extend(self.poles[axis_index(axis)].iter().filter(|c| c.on_closure).map(|c| c.point.clone()));
        out.sort_by(|a, b| {
            a.location.coord(axis).total_cmp(&b.location.coord(axis)).then(a.location.other(axis).total_cmp(&b.location.other(axis)))
        });
        out
    }

    pub fn classify_morse(&self) -> MorseReport {
        let mut witnesses = Vec::new();
        let rel = 1e-8;
        for axis in Axis::both() {
            for p in self.poles[axis_index(axis)].iter().filter(|p| p.on_closure) {
                let c = &self.curves[p.point.curves[0]];
                let q = p.point.location;
                let second = match axis {
                    Axis::X => c.d.fyy.eval(q),
                    Axis::Y => c.d.fxx.eval(q),
                };
                let g = c.d.grad(q).norm();
                let scale = c.d.fxx.magnitude_at(q).max(c.d.fyy.magnitude_at(q)).max(g).max(1e-300);
                if second.abs() <= rel * scale {
                    witnesses.push(Witness { reason: format!("degenerate {}-pole of curve {}", axis.name(), c.index), location: q });
                }
            }
        }
        for x in self.crossings.iter().filter(|c| c.on_closure) {
            let q = x.point.location;
            for &k in &x.point.curves {
                let g = self.curves[k].d.grad(q);
                let n = g.norm();
                if g.x.abs() <= rel * n || g.y.abs() <= rel * n {
                    witnesses.push(Witness { reason: format!("crossing with an axis-parallel tangent of curve {k}"), location: q });
                }
            }
        }
        let morse = witnesses.is_empty();
        let mut g_morse = morse;
        let eps = 10.0 * self.tol() * self.scene.length_scale();
        for axis in Axis::both() {
            let f = self.characteristic_set(axis);
            for w in f.windows(2) {
                let (a, b) = (w[0].location, w[1].location);
                if (a.coord(axis) - b.coord(axis)).abs() <= eps {
                    g_morse = false;
                    witnesses.push(Witness { reason: format!("shared {}-coordinate", axis.name()), location: b });
                }
            }
        }
        MorseReport { morse, g_morse, witnesses }
    }

    /// Inflections of the curves that lie on the boundary.
    pub fn boundary_inflections(&self) -> Result<Vec<CharPoint>> {
        let mut out = Vec::new();
        for c in &self.curves {
            for p in find_inflections_all(c, self.tol())? {
                if self.closure_contains_point(p.location)? {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }

    pub fn boundary_curvature_vertices(&self) -> Result<Vec<CharPoint>> {
        let mut out = Vec::new();
        for c in &self.curves {
            for p in find_curvature_vertices_all(c, self.tol())? {
                if self.closure_contains_point(p.location)? {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }

    pub fn bitangents(&self) -> Result<Vec<Bitangent>> {
        let mut out = Vec::new();
        for c in &self.curves {
            out.extend(find_bitangents(c, self.tol())?);
        }
        Ok(out)
    }

    /// Boundary points lying on a double tangent line.
    pub fn ndtl_witnesses(&self, opts: FlagOptions) -> Result<Vec<NdtlWitness>> {
        let bb = &self.scene.bbox;
        let mut out = Vec::new();
        for b in self.bitangents()? {
            let Some((a, e)) = clip_line(bb, b.line.base, b.line.direction) else { continue };
            for c in &self.curves {
                if opts.ndtl_same_curve_only && c.index != b.curve {
                    continue;
                }
                let r = c.poly().restrict_to_segment(a, e)?;
                if r.is_zero() {
                    continue;
                }
                for ri in isolate_roots_lenient(&r, 0.0, 1.0, 1e-13)? {
                    let p = a.lerp(e, ri.mid());
                    let p = c.d.project(p).unwrap_or(p);
                    if self.closure_contains_point(p)? && !out.iter().any(|w: &NdtlWitness| w.point.dist(p) < 1e-7) {
                        out.push(NdtlWitness { point: p, curve: c.index, bitangent: b.clone() });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn check_flags(&self, opts: FlagOptions) -> Result<FlagReport> {
        let inflections = self.boundary_inflections()?;
        let ndtl_witnesses = self.ndtl_witnesses(opts)?;
        let curvature_vertices = self.boundary_curvature_vertices()?;
        Ok(FlagReport {
            nip: inflections.is_empty(),
            ndtl: ndtl_witnesses.is_empty(),
            ncv: curvature_vertices.is_empty(),
            inflections,
            ndtl_witnesses,
            curvature_vertices,
        })
    }

    /// Pieces of the traced curves that lie on the boundary.
    fn trace_boundary(&self) -> Result<Vec<BoundaryArc>> {
        let mut arcs = Vec::new();
        for c in &self.curves {
            for comp in &c.components {
                arcs.extend(self.boundary_pieces(c.index, comp)?);
            }
        }
        Ok(arcs)
    }

    fn boundary_pieces(&self, curve: usize, comp: &Polyline) -> Result<Vec<BoundaryArc>> {
        let n = comp.points.len();
        let mut flags = Vec::with_capacity(n);
        for &p in &comp.points {
            flags.push(self.scene.bbox.strictly_contains(p) && self.closure_contains_point(p).unwrap_or(false));
        }
        if comp.closed && flags.iter().all(|&f| f) {
            return Ok(vec![BoundaryArc { curve, points: comp.points.clone(), closed: true }]);
        }
        let mut arcs = Vec::new();
        // Start at a gap so that arcs of a loop are not split at index 0.
        let start = if comp.closed { flags.iter().position(|f| !f).unwrap_or(0) } else { 0 };
        let mut cur: Vec<Point> = Vec::new();
        let m = if comp.closed { n + 1 } else { n };
        for s in 0..m {
            let i = (start + s) % n;
            if flags[i] {
                cur.push(comp.points[i]);
            } else if !cur.is_empty() {
                arcs.push(BoundaryArc { curve, points: std::mem::take(&mut cur), closed: false });
            }
        }
        if !cur.is_empty() {
            arcs.push(BoundaryArc { curve, points: cur, closed: false });
        }
        arcs.retain(|a| a.points.len() > 1);
        Ok(arcs)
    }
}

/// The chord of the line through `p` with direction `d` inside the box.
pub fn clip_line(bb: &Box2, p: Point, d: Point) -> Option<(Point, Point)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (pc, dc, a, b) in [(p.x, d.x, bb.x_lo, bb.x_hi), (p.y, d.y, bb.y_lo, bb.y_hi)] {
        if dc.abs() < 1e-300 {
            if pc < a || pc > b {
                return None;
            }
        } else {
            let (t1, t2) = ((a - pc) / dc, (b - pc) / dc);
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
        }
    }
    (lo < hi).then(|| (p + d * lo, p + d * hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(cx: f64, cy: f64, r: f64) -> Poly2 {
        Poly2::from_terms([
            (2, 0, 1.0),
            (0, 2, 1.0),
            (1, 0, -2.0 * cx),
            (0, 1, -2.0 * cy),
            (0, 0, cx * cx + cy * cy - r * r),
        ])
    }

    fn disk() -> Domain {
        build_domain(&Scene::new(vec![circle(0.0, 0.0, 1.0)], Box2::centered(2.0), Point::new(0.0, 0.0))).unwrap()
    }

    fn annulus() -> Domain {
        let s = Scene::new(vec![circle(0.0, 0.0, 1.0), circle(0.0, 0.0, 0.5)], Box2::centered(2.0), Point::new(0.0, 0.7));
        build_domain(&s).unwrap()
    }

    #[test]
    fn disk_membership() {
        let d = disk();
        assert!(d.contains_point(Point::new(0.5, 0.0)).unwrap());
        assert!(!d.contains_point(Point::new(1.5, 0.0)).unwrap());
        assert!(matches!(d.contains_point(Point::new(1.0, 0.0)), Err(Error::OnCurve(_))));
        assert!(matches!(d.contains_point(Point::new(3.0, 0.0)), Err(Error::OutsideBox(_))));
        assert!(d.crossings.is_empty());
        let f = d.characteristic_set(Axis::X);
        assert_eq!(f.len(), 2);
        assert!((f[0].location.x + 1.0).abs() < 1e-12 && (f[1].location.x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn annulus_membership_and_poles() {
        let d = annulus();
        assert!(!d.contains_point(Point::new(0.0, 0.0)).unwrap());
        assert!(d.contains_point(Point::new(0.75, 0.0)).unwrap());
        assert_eq!(d.characteristic_set(Axis::X).len(), 4);
        let m = d.classify_morse();
        assert!(m.morse && m.g_morse);
    }

    #[test]
    fn circle_and_parabola() {
        let par = Poly2::from_terms([(0, 1, 1.0), (2, 0, -1.0), (0, 0, 0.5)]);
        let s = Scene::new(vec![circle(0.0, 0.0, 1.0), par], Box2::centered(2.0), Point::new(0.0, -0.2));
        let d = build_domain(&s).unwrap();
        assert_eq!(d.crossings.iter().filter(|c| c.on_closure).count(), 2);
        // The bottom pole of the parabola, (0, -0.5), is on the boundary for the y projection.
        let fy = d.characteristic_set(Axis::Y);
        assert!(fy.iter().any(|p| matches!(p.kind, CharKind::Pole(Axis::Y)) && (p.location.y + 0.5).abs() < 1e-9));
    }

    #[test]
    fn stacked_circles_are_not_g_morse() {
        let big = Poly2::from_terms([(2, 0, 1.0 / 9.0), (0, 2, 1.0 / 25.0), (0, 0, -1.0)]);
        let s = Scene::new(vec![circle(0.0, 2.0, 1.0), circle(0.0, -2.0, 1.0), big], Box2::centered(6.0), Point::new(2.0, 0.0));
        let d = build_domain(&s).unwrap();
        let m = d.classify_morse();
        assert!(m.morse);
        assert!(!m.g_morse);
    }

    #[test]
    fn non_morse_crossing() {
        // The cubic is flat at the origin, where the circle crosses it vertically.
        let cubic = Poly2::from_terms([(0, 1, 1.0), (3, 0, -1.0)]);
        let c = circle(1.0, 0.0, 1.0);
        let s = Scene::new(vec![cubic, c], Box2::centered(2.5), Point::new(0.5, 0.5));
        let d = build_domain(&s).unwrap();
        let m = d.classify_morse();
        assert!(!m.morse);
        assert!(m.witnesses.iter().any(|w| w.location.norm() < 1e-6));
    }

    #[test]
    fn unbounded_and_misses() {
        let line = Poly2::from_terms([(0, 1, 1.0), (1, 0, -0.3), (0, 0, -0.1)]);
        let s = Scene::new(vec![line], Box2::centered(2.0), Point::new(0.0, 1.0));
        assert!(matches!(build_domain(&s), Err(Error::UnboundedDomain)));
        let s = Scene::new(vec![circle(0.0, 0.0, 1.0), circle(5.0, 5.0, 1.0)], Box2::centered(8.0), Point::new(0.0, 0.0));
        assert!(matches!(build_domain(&s), Err(Error::CurveMissesClosure(1))));
    }

    #[test]
    fn tangential_crossing_is_rejected() {
        let s = Scene::new(vec![circle(0.0, 0.0, 1.0), circle(2.0, 0.0, 1.0), circle(1.0, 0.0, 3.0)], Box2::centered(5.0), Point::new(1.0, 1.5));
        assert!(matches!(build_domain(&s), Err(Error::TangentialCrossing { .. })), "{:?}", build_domain(&s).err());
    }

    #[test]
    fn triple_point_is_rejected() {
        let lines = [
            Poly2::from_terms([(1, 0, 1.0), (0, 1, -1.0)]),
            Poly2::from_terms([(1, 0, 1.0), (0, 1, 1.0)]),
            Poly2::from_terms([(1, 0, 2.0), (0, 1, -1.0)]),
        ];
        let mut curves = lines.to_vec();
        curves.push(circle(0.0, 0.0, 1.0));
        let s = Scene::new(curves, Box2::centered(2.0), Point::new(0.5, 0.3));
        assert!(matches!(build_domain(&s), Err(Error::TriplePoint(_))), "{:?}", build_domain(&s).err());
    }

    #[test]
    fn flags_on_disk() {
        let f = disk().check_flags(FlagOptions::default()).unwrap();
        assert!(f.nip && f.ndtl && f.ncv);
    }

    #[test]
    fn scene_json_round_trip() {
        let s = Scene::new(vec![circle(0.1, 0.0, 1.0 / 3.0)], Box2::centered(2.0), Point::new(0.1, 0.0));
        let back = Scene::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), s.to_json());
    }
}
