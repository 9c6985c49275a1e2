//! Geometry of a single plane curve `{f = 0}`: singularity check, tracing,
//! tangents, curvature, and the curve's characteristic points.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Axis, Box2, Point};
use crate::interval::Interval;
use crate::poly::Poly2;
use crate::roots::isolate_roots_lenient;
use crate::systems::{polish_newton, solve_pair, solve_system_lenient, CertifiedPoint, SolveOptions, System};

/// Relative residual accepted for traced points: `|f| <= TRACE_REL * magnitude`.
pub const TRACE_REL: f64 = 1e-9;

/// `f` with the partial derivatives used throughout, computed once.
#[derive(Clone, Debug)]
pub struct Derivs {
    pub f: Poly2,
    pub fx: Poly2,
    pub fy: Poly2,
    pub fxx: Poly2,
    pub fxy: Poly2,
    pub fyy: Poly2,
}

impl Derivs {
    pub fn new(f: &Poly2) -> Self {
        let fx = f.dx();
        let fy = f.dy();
        Derivs { fxx: fx.dx(), fxy: fx.dy(), fyy: fy.dy(), fx, fy, f: f.clone() }
    }

    pub fn grad(&self, p: Point) -> Point {
        Point::new(self.fx.eval(p), self.fy.eval(p))
    }

    /// Residual bound for "on the curve" at `p`.
    pub fn on_curve_tol(&self, p: Point) -> f64 {
        TRACE_REL * self.f.magnitude_at(p).max(1.0)
    }

    /// `f_y^2 f_xx - 2 f_x f_y f_xy + f_x^2 f_yy`, the numerator of curvature.
    pub fn curvature_numerator(&self) -> Poly2 {
        let a = &(&self.fy * &self.fy) * &self.fxx;
        let b = &(&self.fx * &self.fy) * &self.fxy;
        let c = &(&self.fx * &self.fx) * &self.fyy;
        &(&a - &b.scaled(2.0)) + &c
    }

    /// Polynomial with the sign of the arc-length derivative of curvature
    /// along the tangent `(-f_y, f_x)`.
    pub fn curvature_slope(&self) -> Poly2 {
        let n = self.curvature_numerator();
        let g = &(&self.fx * &self.fx) + &(&self.fy * &self.fy);
        let along = |h: &Poly2| &(&h.dx() * &(-&self.fy)) + &(&h.dy() * &self.fx);
        &(&g * &along(&n)) - &(&n * &along(&g)).scaled(1.5)
    }

    /// Project `p` onto the curve along the gradient.
    pub fn project(&self, mut p: Point) -> Option<Point> {
        for _ in 0..12 {
            let v = self.f.eval(p);
            if v.abs() <= self.on_curve_tol(p) {
                return Some(p);
            }
            let g = self.grad(p);
            let gg = g.dot(g);
            if !(gg > 0.0) {
                return None;
            }
            p = p - g * (v / gg);
        }
        (self.f.eval(p).abs() <= self.on_curve_tol(p)).then_some(p)
    }

    /// Unit tangent `(-f_y, f_x) / |grad f|`.
    pub fn tangent(&self, p: Point) -> Option<Point> {
        let g = self.grad(p);
        let n = g.norm();
        (n > 0.0).then(|| Point::new(-g.y / n, g.x / n))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point>,
    /// Cumulative arc length, `arclen[0] = 0`.
    pub arclen: Vec<f64>,
    pub closed: bool,
}

impl Polyline {
    fn new(points: Vec<Point>, closed: bool) -> Self {
        let mut arclen = Vec::with_capacity(points.len());
        let mut s = 0.0;
        for (k, p) in points.iter().enumerate() {
            if k > 0 {
                s += p.dist(points[k - 1]);
            }
            arclen.push(s);
        }
        Polyline { points, arclen, closed }
    }

    pub fn length(&self) -> f64 {
        let open = self.arclen.last().copied().unwrap_or(0.0);
        if self.closed && self.points.len() > 1 {
            open + self.points[0].dist(*self.points.last().unwrap())
        } else {
            open
        }
    }

    /// Consecutive point pairs, including the closing segment of a loop.
    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        let m = if self.closed { n } else { n.saturating_sub(1) };
        (0..m).map(move |k| (self.points[k], self.points[(k + 1) % n]))
    }
}

/// A non-singular curve traced inside a box.
#[derive(Clone, Debug)]
pub struct Curve {
    /// Position of the curve in its scene.
    pub index: usize,
    pub bbox: Box2,
    pub step: f64,
    pub components: Vec<Polyline>,
    pub d: Derivs,
}

impl Curve {
    pub fn poly(&self) -> &Poly2 {
        &self.d.f
    }

    /// Points closer than this to the box boundary are not reported.
    pub fn margin(&self) -> f64 {
        2.0 * self.step
    }

    fn away_from_edge(&self, p: Point) -> bool {
        self.bbox.strictly_contains(p) && self.bbox.boundary_distance(p) > self.margin()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "points", rename_all = "snake_case")]
pub enum Singularity {
    NonSingular,
    SingularAt(Vec<Point>),
    EmptyZeroSet,
}

/// Decide whether `f` has a singular zero in `region`.
pub fn check_nonsingular(f: &Poly2, region: &Box2, tol: f64) -> Result<Singularity> {
    if f.scale() <= crate::roots::ZERO_COEFF {
        return Err(Error::IdenticallyZero);
    }
    let d = Derivs::new(f);
    let mut stack = vec![(region.xs(), region.ys())];
    let min_w = 1e-9 * region.diameter().max(1.0);
    let mut candidates: Vec<(Interval, Interval)> = Vec::new();
    let mut zero_set_seen = false;
    let mut processed = 0usize;
    const BUDGET: usize = 2_000_000;
    while let Some((xs, ys)) = stack.pop() {
        processed += 1;
        if processed > BUDGET {
            return Err(Error::BudgetExceeded { budget: BUDGET });
        }
        let gx = d.fx.eval_interval(xs, ys);
        let gy = d.fy.eval_interval(xs, ys);
        if !mean_value(f, gx, gy, xs, ys).contains_zero() {
            continue;
        }
        zero_set_seen = true;
        let hxx = d.fxx.eval_interval(xs, ys);
        let hxy = d.fxy.eval_interval(xs, ys);
        let hyy = d.fyy.eval_interval(xs, ys);
        if !mean_value(&d.fx, hxx, hxy, xs, ys).contains_zero() || !mean_value(&d.fy, hxy, hyy, xs, ys).contains_zero() {
            continue;
        }
        if xs.width().max(ys.width()) < min_w {
            candidates.push((xs, ys));
            continue;
        }
        let (xl, xr) = split(xs);
        let (yl, yr) = split(ys);
        stack.extend([(xl, yl), (xl, yr), (xr, yl), (xr, yr)]);
    }
    if !zero_set_seen {
        return Ok(Singularity::EmptyZeroSet);
    }
    if candidates.is_empty() {
        return if has_sign_change(f, region) {
            Ok(Singularity::NonSingular)
        } else {
            // Interval evaluation could not exclude zeros, but nothing vanishes
            // and no cell pins a critical zero: confirm emptiness on a fine grid.
            Ok(if zero_set_plausible(f, region) { Singularity::NonSingular } else { Singularity::EmptyZeroSet })
        };
    }
    let mut pts: Vec<Point> = Vec::new();
    for (xs, ys) in candidates {
        let c = Point::new(xs.mid(), ys.mid());
        let sys = crate::systems::PolySystem2::new(d.fx.clone(), d.fy.clone());
        let p = crate::systems::polish_newton(&sys, &[c.x, c.y], tol)
            .map(|cp| cp.point())
            .unwrap_or(c);
        if pts.iter().all(|q| q.dist(p) > 1e-6 * region.diameter()) {
            pts.push(p);
        }
    }
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    Ok(Singularity::SingularAt(pts))
}

/// Enclosure of `f` over a box: the natural extension intersected with the
/// mean-value form around the centre, given enclosures of the gradient.
fn mean_value(f: &Poly2, gx: Interval, gy: Interval, xs: Interval, ys: Interval) -> Interval {
    let natural = f.eval_interval(xs, ys);
    let (cx, cy) = (xs.mid(), ys.mid());
    let centre = f.eval_interval(Interval::point(cx), Interval::point(cy));
    let mv = centre + gx * (xs - Interval::point(cx)) + gy * (ys - Interval::point(cy));
    // Both contain the true range, so their intersection is never empty.
    natural.intersect(&mv).unwrap_or(natural)
}

fn split(i: Interval) -> (Interval, Interval) {
    let m = i.lo + 0.499_972_1 * i.width();
    (Interval::new(i.lo, m), Interval::new(m, i.hi))
}

fn has_sign_change(f: &Poly2, region: &Box2) -> bool {
    let n = 256;
    let mut pos = false;
    let mut neg = false;
    for i in 0..=n {
        for j in 0..=n {
            let p = Point::new(
                region.x_lo + region.width() * i as f64 / n as f64,
                region.y_lo + region.height() * j as f64 / n as f64,
            );
            let v = f.eval(p);
            pos |= v > 0.0;
            neg |= v < 0.0;
            if pos && neg {
                return true;
            }
        }
    }
    false
}

fn zero_set_plausible(f: &Poly2, region: &Box2) -> bool {
    let n = 256;
    let h = region.width().max(region.height()) / n as f64;
    (0..=n).any(|i| {
        (0..=n).any(|j| {
            let p = Point::new(region.x_lo + region.width() * i as f64 / n as f64, region.y_lo + region.height() * j as f64 / n as f64);
            f.eval(p).abs() <= f.gradient(p).norm() * h
        })
    })
}

/// Trace every branch of `{f = 0}` meeting `region` with steps of about `step`.
pub fn trace_curve(f: &Poly2, region: &Box2, step: f64) -> Result<Curve> {
    trace_indexed(f, region, step, 0)
}

pub fn trace_indexed(f: &Poly2, region: &Box2, step: f64, index: usize) -> Result<Curve> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput("trace step must be positive".into()));
    }
    let d = Derivs::new(f);
    let mut tracer = Tracer { d: &d, region: *region, step, hash: SpatialHash::new(2.0 * step), components: Vec::new() };
    for seed in seeds(&d, region, step) {
        tracer.trace_from(seed)?;
    }
    let components = tracer.components;
    Ok(Curve { index, bbox: *region, step, components, d })
}

fn seeds(d: &Derivs, region: &Box2, step: f64) -> Vec<Point> {
    let mut out = Vec::new();
    let f = &d.f;
    // Points where the curve crosses the box edges.
    let edges = [
        (Axis::X, region.x_lo, region.ys()),
        (Axis::X, region.x_hi, region.ys()),
        (Axis::Y, region.y_lo, region.xs()),
        (Axis::Y, region.y_hi, region.xs()),
    ];
    for (axis, t, range) in edges {
        let r = f.restrict_to_line(axis, t);
        if let Ok(roots) = isolate_roots_lenient(&r, range.lo, range.hi, 1e-12 * range.mag().max(1.0)) {
            out.extend(roots.iter().map(|ri| Point::from_axis(axis, t, ri.mid())));
        }
    }
    // Every closed oval has a leftmost point.
    if let Ok(poles) = solve_pair(f, &d.fy, region, &SolveOptions::default()) {
        out.extend(poles.iter().map(|p| p.point()));
    }
    // Grid sign changes catch whatever is left.
    let n = ((region.width().max(region.height()) / (4.0 * step)).ceil() as usize).clamp(16, 512);
    let at = |i: usize, j: usize| {
        Point::new(
            region.x_lo + region.width() * i as f64 / n as f64,
            region.y_lo + region.height() * j as f64 / n as f64,
        )
    };
    let vals: Vec<Vec<f64>> = (0..=n).map(|i| (0..=n).map(|j| f.eval(at(i, j))).collect()).collect();
    for i in 0..=n {
        for j in 0..=n {
            if i < n && vals[i][j] * vals[i + 1][j] < 0.0 {
                out.push(bisect_segment(f, at(i, j), at(i + 1, j)));
            }
            if j < n && vals[i][j] * vals[i][j + 1] < 0.0 {
                out.push(bisect_segment(f, at(i, j), at(i, j + 1)));
            }
        }
    }
    out
}

fn bisect_segment(f: &Poly2, mut a: Point, mut b: Point) -> Point {
    let mut fa = f.eval(a);
    for _ in 0..60 {
        let m = a.lerp(b, 0.5);
        let fm = f.eval(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    a.lerp(b, 0.5)
}

struct SpatialHash {
    cell: f64,
    map: std::collections::HashMap<(i64, i64), Vec<Point>>,
}

impl SpatialHash {
    fn new(cell: f64) -> Self {
        SpatialHash { cell, map: Default::default() }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    fn insert(&mut self, p: Point) {
        let k = self.key(p);
        self.map.entry(k).or_default().push(p);
    }

    fn near(&self, p: Point, r: f64) -> bool {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.map.get(&(kx + dx, ky + dy)) {
                    if v.iter().any(|q| q.dist(p) <= r) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

struct Tracer<'a> {
    d: &'a Derivs,
    region: Box2,
    step: f64,
    hash: SpatialHash,
    components: Vec<Polyline>,
}

enum Walk {
    Closed(Vec<Point>),
    Exited(Vec<Point>),
}

impl Tracer<'_> {
    fn trace_from(&mut self, seed: Point) -> Result<()> {
        let Some(seed) = self.d.project(seed) else { return Ok(()) };
        if !self.region.contains(seed) || self.hash.near(seed, 2.0 * self.step) {
            return Ok(());
        }
        if self.d.tangent(seed).is_none() {
            return Err(Error::SingularPoint(seed));
        }
        let points = match self.walk(seed, 1.0)? {
            Walk::Closed(pts) => Polyline::new(pts, true),
            Walk::Exited(fwd) => {
                let Walk::Exited(bwd) = self.walk(seed, -1.0)? else {
                    // A loop found only backwards cannot happen for a smooth curve.
                    return Err(Error::TraceStalled(seed));
                };
                let mut pts: Vec<Point> = bwd.into_iter().skip(1).rev().collect();
                pts.extend(fwd);
                Polyline::new(pts, false)
            }
        };
        for &p in &points.points {
            self.hash.insert(p);
        }
        self.components.push(points);
        Ok(())
    }

    fn walk(&self, start: Point, dir: f64) -> Result<Walk> {
        let mut pts = vec![start];
        let mut p = start;
        let mut h = self.step;
        let min_h = self.step * 1e-6;
        let max_points = 20_000_000usize.min((400.0 * self.region.diameter() / self.step) as usize + 1000);
        let mut travelled = 0.0;
        loop {
            if pts.len() > max_points {
                return Err(Error::TraceStalled(p));
            }
            let t = self.d.tangent(p).ok_or(Error::SingularPoint(p))? * dir;
            if travelled > 3.0 * self.step && pts.len() > 3 {
                let back = start - p;
                if back.norm() <= 1.5 * h && back.dot(t) > 0.0 {
                    return Ok(Walk::Closed(pts));
                }
            }
            let q = loop {
                if h < min_h {
                    return Err(Error::TraceStalled(p));
                }
                let guess = p + t * h;
                if let Some(q) = self.d.project(guess) {
                    let dq = q.dist(p);
                    let tq = self.d.tangent(q).map(|v| v * dir);
                    let smooth = tq.is_some_and(|v| v.dot(t) > 0.95);
                    if dq <= 1.5 * h && dq >= 0.3 * h && smooth {
                        break q;
                    }
                }
                h *= 0.5;
            };
            travelled += q.dist(p);
            pts.push(q);
            p = q;
            h = (h * 2.0).min(self.step);
            if !self.region.contains(p) {
                return Ok(Walk::Exited(pts));
            }
            if travelled > 2.0 * self.step && self.hash.near(p, 0.5 * self.step) {
                // Ran into a component traced earlier; the seed is a duplicate.
                return Ok(Walk::Exited(pts));
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentLine {
    pub base: Point,
    pub direction: Point,
    /// `(a, b, c)` with `a x + b y + c = 0` and `a^2 + b^2 = 1`.
    pub implicit: [f64; 3],
}

impl TangentLine {
    pub fn through(base: Point, normal: Point) -> Self {
        let n = normal.normalized();
        TangentLine { base, direction: n.perp(), implicit: [n.x, n.y, -(n.x * base.x + n.y * base.y)] }
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        let [a, b, c] = self.implicit;
        a * p.x + b * p.y + c
    }
}

fn singular_guard(d: &Derivs, p: Point) -> Result<Point> {
    let g = d.grad(p);
    if g.norm() <= 1e-12 * d.f.magnitude_at(p).max(1.0) {
        return Err(Error::SingularPoint(p));
    }
    Ok(g)
}

pub fn tangent_at(f: &Poly2, p: Point) -> Result<TangentLine> {
    let d = Derivs::new(f);
    let g = singular_guard(&d, p)?;
    Ok(TangentLine::through(p, g))
}

/// Signed curvature for the orientation with tangent `(-f_y, f_x)`.
pub fn curvature_at(f: &Poly2, p: Point) -> Result<f64> {
    curvature_with(&Derivs::new(f), p)
}

pub fn curvature_with(d: &Derivs, p: Point) -> Result<f64> {
    let g = singular_guard(d, p)?;
    let (fx, fy) = (g.x, g.y);
    let num = fy * fy * d.fxx.eval(p) - 2.0 * fx * fy * d.fxy.eval(p) + fx * fx * d.fyy.eval(p);
    Ok(num / g.norm().powi(3))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "axis", rename_all = "snake_case")]
pub enum CharKind {
    Crossing,
    Pole(Axis),
    Inflection,
    BitangentContact,
    CurvatureVertex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharPoint {
    #[serde(flatten)]
    pub kind: CharKind,
    pub location: Point,
    pub curves: Vec<usize>,
    pub radius: f64,
    pub residual: f64,
}

impl CharPoint {
    fn from_cert(kind: CharKind, cp: &CertifiedPoint, curve: usize) -> Self {
        CharPoint { kind, location: cp.point(), curves: vec![curve], radius: cp.radius, residual: cp.residual }
    }
}

/// Poles of the projection to `axis`: solutions of `{f, f_y}` for X and
/// `{f, f_x}` for Y, including those near the box edge.
pub fn find_poles_all(curve: &Curve, axis: Axis, tol: f64) -> Result<Vec<CharPoint>> {
    let partial = match axis {
        Axis::X => &curve.d.fy,
        Axis::Y => &curve.d.fx,
    };
    if partial.scale() <= crate::roots::ZERO_COEFF {
        // A straight line parallel to the fibers: its points are not isolated.
        return Ok(Vec::new());
    }
    // Degenerate poles (e.g. at a flat inflection) are kept: they are real
    // points of the set, and the Morse check rejects them afterwards.
    let sys = crate::systems::PolySystem2::new(curve.d.f.clone(), partial.clone());
    let opts = SolveOptions::with_tol(tol * curve.d.f.scale().max(1.0));
    let sols = solve_system_lenient(&sys, &[curve.bbox.xs(), curve.bbox.ys()], &opts)?;
    let mut out: Vec<CharPoint> = sols
        .regular
        .iter()
        .chain(&sols.degenerate)
        .map(|s| CharPoint::from_cert(CharKind::Pole(axis), s, curve.index))
        .collect();
    out.sort_by(|a, b| a.location.x.total_cmp(&b.location.x).then(a.location.y.total_cmp(&b.location.y)));
    Ok(out)
}

pub fn find_poles(curve: &Curve, axis: Axis, tol: f64) -> Result<Vec<CharPoint>> {
    Ok(retain_inner(curve, find_poles_all(curve, axis, tol)?))
}

fn retain_inner(curve: &Curve, pts: Vec<CharPoint>) -> Vec<CharPoint> {
    pts.into_iter().filter(|c| curve.away_from_edge(c.location)).collect()
}

/// Polish a point of `{f = 0, g = 0}` found from a sign change of `g`
/// along the polyline.
fn polish_on_curve(d: &Derivs, g: &Poly2, seed: Point, tol: f64) -> Result<CertifiedPoint> {
    let sys = crate::systems::PolySystem2::new(d.f.clone(), g.clone());
    polish_newton(&sys, &[seed.x, seed.y], tol)
}

/// Walk along the curve from `p` by signed arc length `s` (approximately).
pub fn walk_along(d: &Derivs, p: Point, s: f64, step: f64) -> Option<Point> {
    let n = ((s.abs() / step).ceil() as usize).max(1);
    let h = s / n as f64;
    let mut q = p;
    for _ in 0..n {
        let t = d.tangent(q)?;
        q = d.project(q + t * h)?;
    }
    Some(q)
}

fn sign_change_seeds(curve: &Curve, g: &Poly2) -> Vec<Point> {
    let mut out = Vec::new();
    for comp in &curve.components {
        let vals: Vec<f64> = comp.points.iter().map(|&p| g.eval(p)).collect();
        let n = vals.len();
        let m = if comp.closed { n } else { n.saturating_sub(1) };
        for k in 0..m {
            let (a, b) = (vals[k], vals[(k + 1) % n]);
            if a == 0.0 {
                out.push(comp.points[k]);
            } else if a * b < 0.0 {
                let (p, q) = (comp.points[k], comp.points[(k + 1) % n]);
                let t = a / (a - b);
                out.push(p.lerp(q, t));
            }
        }
    }
    out
}

fn dedup_points(mut pts: Vec<CharPoint>, eps: f64) -> Vec<CharPoint> {
    pts.sort_by(|a, b| a.location.x.total_cmp(&b.location.x).then(a.location.y.total_cmp(&b.location.y)));
    let mut out: Vec<CharPoint> = Vec::new();
    for p in pts {
        if out.iter().all(|q| q.location.dist(p.location) > eps) {
            out.push(p);
        }
    }
    out
}

/// Opposite non-negligible signs of `g` at arc length `-w` and `+w` from `p`.
fn changes_sign_across(d: &Derivs, g: &Poly2, p: Point, w: f64, step: f64, what: &'static str) -> Result<bool> {
    let a = walk_along(d, p, -w, step).ok_or(Error::SingularPoint(p))?;
    let b = walk_along(d, p, w, step).ok_or(Error::SingularPoint(p))?;
    let (ga, gb) = (g.eval(a), g.eval(b));
    let noise = |q: Point| 1e3 * f64::EPSILON * g.magnitude_at(q);
    if ga.abs() <= noise(a) || gb.abs() <= noise(b) {
        return Err(Error::SignUndetermined { what, at: p });
    }
    Ok(ga * gb < 0.0)
}

pub fn find_inflections_all(curve: &Curve, tol: f64) -> Result<Vec<CharPoint>> {
    let n = curve.d.curvature_numerator();
    if n.scale() <= 1e-12 * curve.d.f.scale().powi(3).max(1.0) {
        // Straight line: curvature vanishes identically, nothing crosses.
        return Ok(Vec::new());
    }
    let delta = 5.0 * curve.step;
    let mut out = Vec::new();
    for seed in sign_change_seeds(curve, &n) {
        let Ok(cp) = polish_on_curve(&curve.d, &n, seed, tol * n.scale().max(1.0)) else { continue };
        let p = cp.point();
        if changes_sign_across(&curve.d, &n, p, delta, curve.step, "inflection numerator")? {
            out.push(CharPoint::from_cert(CharKind::Inflection, &cp, curve.index));
        }
    }
    Ok(dedup_points(out, curve.step))
}

pub fn find_inflections(curve: &Curve, tol: f64) -> Result<Vec<CharPoint>> {
    Ok(retain_inner(curve, find_inflections_all(curve, tol)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bitangent {
    pub line: TangentLine,
    pub contacts: [Point; 2],
    pub residual: f64,
    pub curve: usize,
}

/// The four-unknown system for a line tangent at two points `p`, `q`.
struct BitangentSystem<'a> {
    d: &'a Derivs,
}

impl System for BitangentSystem<'_> {
    fn dim(&self) -> usize {
        4
    }

    fn eval(&self, v: &[f64]) -> Vec<f64> {
        let (p, q) = (Point::new(v[0], v[1]), Point::new(v[2], v[3]));
        let (gp, gq) = (self.d.grad(p), self.d.grad(q));
        let w = q - p;
        vec![self.d.f.eval(p), self.d.f.eval(q), gp.dot(w), gq.dot(w)]
    }

    fn jacobian(&self, v: &[f64]) -> DMatrix<f64> {
        let (p, q) = (Point::new(v[0], v[1]), Point::new(v[2], v[3]));
        let (gp, gq) = (self.d.grad(p), self.d.grad(q));
        let w = q - p;
        let hess = |r: Point| (self.d.fxx.eval(r), self.d.fxy.eval(r), self.d.fyy.eval(r));
        let (pxx, pxy, pyy) = hess(p);
        let (qxx, qxy, qyy) = hess(q);
        let hp = Point::new(pxx * w.x + pxy * w.y, pxy * w.x + pyy * w.y);
        let hq = Point::new(qxx * w.x + qxy * w.y, qxy * w.x + qyy * w.y);
        DMatrix::from_row_slice(
            4,
            4,
            &[
                gp.x, gp.y, 0.0, 0.0, //
                0.0, 0.0, gq.x, gq.y, //
                hp.x - gp.x, hp.y - gp.y, gp.x, gp.y, //
                -gq.x, -gq.y, hq.x + gq.x, hq.y + gq.y,
            ],
        )
    }

    fn eval_box(&self, b: &[Interval]) -> Vec<Interval> {
        let d = self.d;
        let (wx, wy) = (b[2] - b[0], b[3] - b[1]);
        vec![
            d.f.eval_interval(b[0], b[1]),
            d.f.eval_interval(b[2], b[3]),
            d.fx.eval_interval(b[0], b[1]) * wx + d.fy.eval_interval(b[0], b[1]) * wy,
            d.fx.eval_interval(b[2], b[3]) * wx + d.fy.eval_interval(b[2], b[3]) * wy,
        ]
    }

    fn jacobian_box(&self, b: &[Interval]) -> Vec<Vec<Interval>> {
        let d = self.d;
        let (wx, wy) = (b[2] - b[0], b[3] - b[1]);
        let at = |p: &Poly2, i: usize| p.eval_interval(b[i], b[i + 1]);
        let (gpx, gpy, gqx, gqy) = (at(&d.fx, 0), at(&d.fy, 0), at(&d.fx, 2), at(&d.fy, 2));
        let hpx = at(&d.fxx, 0) * wx + at(&d.fxy, 0) * wy;
        let hpy = at(&d.fxy, 0) * wx + at(&d.fyy, 0) * wy;
        let hqx = at(&d.fxx, 2) * wx + at(&d.fxy, 2) * wy;
        let hqy = at(&d.fxy, 2) * wx + at(&d.fyy, 2) * wy;
        let z = Interval::point(0.0);
        vec![
            vec![gpx, gpy, z, z],
            vec![z, z, gqx, gqy],
            vec![hpx - gpx, hpy - gpy, gpx, gpy],
            vec![-gqx, -gqy, hqx + gqx, hqy + gqy],
        ]
    }
}

/// Minimum contact separation of a bitangent relative to the solver tolerance.
pub const BITANGENT_SEP_FACTOR: f64 = 10.0;

/// Lines tangent to the curve at two distinct points.
pub fn find_bitangents(curve: &Curve, tol: f64) -> Result<Vec<Bitangent>> {
    let d = &curve.d;
    let pts: Vec<Point> = curve.components.iter().flat_map(|c| c.points.iter().copied()).collect();
    let normals: Vec<Point> = pts.iter().map(|&p| d.grad(p).normalized()).collect();
    let n = pts.len();
    let scale = 1.0 + d.f.scale();
    let sep_min = BITANGENT_SEP_FACTOR * tol;
    let skip = 3.0 * curve.step;
    let sys = BitangentSystem { d };
    let mut found: Vec<Bitangent> = Vec::new();
    let g = |i: usize, j: usize| {
        let w = pts[j] - pts[i];
        (normals[i].dot(w), normals[j].dot(w))
    };
    for i in 0..n.saturating_sub(1) {
        for j in (i + 1)..n.saturating_sub(1) {
            if pts[i].dist(pts[j]) < skip || pts[i + 1].dist(pts[j + 1]) < skip {
                continue;
            }
            // Cells of the (i, j) grid where both scalar conditions change sign.
            let c = [g(i, j), g(i + 1, j), g(i, j + 1), g(i + 1, j + 1)];
            let ch = |k: fn(&(f64, f64)) -> f64| {
                let lo = c.iter().map(k).fold(f64::INFINITY, f64::min);
                let hi = c.iter().map(k).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            if !(ch(|v| v.0) && ch(|v| v.1)) {
                continue;
            }
            // Jumps between components make fake cells.
            if pts[i].dist(pts[i + 1]) > 2.5 * curve.step || pts[j].dist(pts[j + 1]) > 2.5 * curve.step {
                continue;
            }
            let p0 = pts[i].lerp(pts[i + 1], 0.5);
            let q0 = pts[j].lerp(pts[j + 1], 0.5);
            let Ok(cp) = polish_newton(&sys, &[p0.x, p0.y, q0.x, q0.y], tol * scale) else { continue };
            let (mut p, mut q) = (Point::new(cp.location[0], cp.location[1]), Point::new(cp.location[2], cp.location[3]));
            if p.dist(q) < sep_min.max(curve.step) || !curve.bbox.contains(p) || !curve.bbox.contains(q) {
                continue;
            }
            if (q.x, q.y) < (p.x, p.y) {
                std::mem::swap(&mut p, &mut q);
            }
            let dup = found.iter().any(|b| b.contacts[0].dist(p) < curve.step && b.contacts[1].dist(q) < curve.step);
            if !dup {
                found.push(Bitangent {
                    line: TangentLine::through(p, d.grad(p)),
                    contacts: [p, q],
                    residual: cp.residual,
                    curve: curve.index,
                });
            }
        }
    }
    found.retain(|b| b.contacts.iter().all(|&c| curve.away_from_edge(c)));
    found.sort_by(|a, b| {
        (a.contacts[0].x, a.contacts[0].y)
            .partial_cmp(&(b.contacts[0].x, b.contacts[0].y))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(found)
}

pub fn find_curvature_vertices_all(curve: &Curve, tol: f64) -> Result<Vec<CharPoint>> {
    let d = &curve.d;
    let k = d.curvature_slope();
    if k.scale() <= 1e-12 * d.f.scale().powi(5).max(1.0) || curvature_is_constant(curve)? {
        return Ok(Vec::new());
    }
    let window = 10.0 * curve.step;
    let mut out = Vec::new();
    for seed in sign_change_seeds(curve, &k) {
        let Ok(cp) = polish_on_curve(d, &k, seed, tol * k.scale().max(1.0)) else { continue };
        let p = cp.point();
        if changes_sign_across(d, &k, p, window, curve.step, "curvature slope")? {
            out.push(CharPoint::from_cert(CharKind::CurvatureVertex, &cp, curve.index));
        }
    }
    Ok(dedup_points(out, curve.step))
}

pub fn find_curvature_vertices(curve: &Curve, tol: f64) -> Result<Vec<CharPoint>> {
    Ok(retain_inner(curve, find_curvature_vertices_all(curve, tol)?))
}

fn curvature_is_constant(curve: &Curve) -> Result<bool> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in &curve.components {
        for &p in &c.points {
            let k = curvature_with(&curve.d, p)?;
            lo = lo.min(k);
            hi = hi.max(k);
        }
    }
    Ok(!(hi - lo > 1e-8 * (1.0 + hi.abs().max(lo.abs()))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(r: f64) -> Poly2 {
        Poly2::from_terms([(2, 0, 1.0), (0, 2, 1.0), (0, 0, -r * r)])
    }

    fn ellipse() -> Poly2 {
        Poly2::from_terms([(2, 0, 0.25), (0, 2, 1.0), (0, 0, -1.0)])
    }

    fn cubic() -> Poly2 {
        Poly2::from_terms([(0, 1, 1.0), (3, 0, -1.0)])
    }

    #[test]
    fn nonsingular_verdicts() {
        let b = Box2::centered(2.0);
        assert_eq!(check_nonsingular(&circle(1.0), &b, 1e-10).unwrap(), Singularity::NonSingular);
        let nodal = Poly2::from_terms([(0, 2, 1.0), (3, 0, -1.0), (2, 0, -1.0)]);
        match check_nonsingular(&nodal, &b, 1e-10).unwrap() {
            Singularity::SingularAt(p) => {
                assert_eq!(p.len(), 1);
                assert!(p[0].norm() < 1e-8);
            }
            v => panic!("{v:?}"),
        }
        let empty = Poly2::from_terms([(2, 0, 1.0), (0, 2, 1.0), (0, 0, 1.0)]);
        assert_eq!(check_nonsingular(&empty, &b, 1e-10).unwrap(), Singularity::EmptyZeroSet);
    }

    #[test]
    fn trace_circle() {
        let c = trace_curve(&circle(1.0), &Box2::centered(2.0), 0.01).unwrap();
        assert_eq!(c.components.len(), 1);
        assert!(c.components[0].closed);
        let len = c.components[0].length();
        assert!((len - std::f64::consts::TAU).abs() < 0.01 * std::f64::consts::TAU, "{len}");
        for comp in &c.components {
            for (a, b) in comp.segments() {
                assert!(a.dist(b) < 0.02);
            }
        }
    }

    #[test]
    fn trace_cubic_open() {
        let c = trace_curve(&cubic(), &Box2::centered(1.0), 0.01).unwrap();
        assert_eq!(c.components.len(), 1);
        assert!(!c.components[0].closed);
        assert!(c.components[0].points.iter().any(|p| p.norm() < 0.01));
    }

    #[test]
    fn trace_two_ovals() {
        let a = Poly2::from_terms([(2, 0, 1.0), (0, 2, 1.0), (1, 0, -4.0), (0, 0, 3.0)]);
        let b = Poly2::from_terms([(2, 0, 1.0), (0, 2, 1.0), (1, 0, 4.0), (0, 0, 3.0)]);
        let c = trace_curve(&(&a * &b), &Box2::centered(4.0), 0.02).unwrap();
        assert_eq!(c.components.len(), 2);
        assert!(c.components.iter().all(|p| p.closed));
    }

    #[test]
    fn tangents() {
        let t = tangent_at(&circle(1.0), Point::new(1.0, 0.0)).unwrap();
        assert!(t.direction.x.abs() < 1e-15);
        assert!((t.signed_distance(Point::new(1.0, 5.0))).abs() < 1e-15);
        let t = tangent_at(&cubic(), Point::new(1.0, 1.0)).unwrap();
        assert!((t.direction.y / t.direction.x - 3.0).abs() < 1e-12);
        let par = Poly2::from_terms([(0, 1, 1.0), (2, 0, -1.0)]);
        let t = tangent_at(&par, Point::new(0.0, 0.0)).unwrap();
        assert!(t.direction.y.abs() < 1e-15);
        assert!(matches!(tangent_at(&Poly2::x().powi(2), Point::new(0.0, 0.0)), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn curvature_values() {
        assert!((curvature_at(&circle(2.0), Point::new(0.0, 2.0)).unwrap() - 0.5).abs() < 1e-14);
        let line = Poly2::from_terms([(1, 0, 1.0), (0, 1, 1.0), (0, 0, -1.0)]);
        assert_eq!(curvature_at(&line, Point::new(0.3, 0.7)).unwrap(), 0.0);
        let par = Poly2::from_terms([(0, 1, 1.0), (2, 0, -1.0)]);
        assert!((curvature_at(&par, Point::new(0.0, 0.0)).unwrap().abs() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn curvature_matches_parametrized_ellipse() {
        // c(t) = (2 cos t, sin t); det(c', c'') / |c'|^3 = 2 / (4 sin^2 + cos^2)^{3/2}
        let f = ellipse();
        for k in 0..24 {
            let t = k as f64 * 0.27;
            let p = Point::new(2.0 * t.cos(), t.sin());
            let want = 2.0 / (4.0 * t.sin().powi(2) + t.cos().powi(2)).powf(1.5);
            let got = curvature_at(&f, p).unwrap();
            // The implicit orientation runs clockwise here, so only |k| must agree.
            assert!((got.abs() - want).abs() < 1e-12, "{got} {want}");
        }
    }

    #[test]
    fn poles() {
        let b = Box2::centered(2.0);
        let c = trace_curve(&circle(1.0), &b, 0.01).unwrap();
        let p = find_poles(&c, Axis::X, 1e-10).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p[0].location.x + 1.0).abs() < 1e-12 && (p[1].location.x - 1.0).abs() < 1e-12);
        let v = trace_curve(&(&Poly2::x() - &Poly2::constant(0.5)), &b, 0.01).unwrap();
        assert!(find_poles(&v, Axis::X, 1e-10).unwrap().is_empty());
    }

    #[test]
    fn pole_at_flat_point_of_cubic() {
        // f_x = -3x^2 has a double zero on the curve; the pole is degenerate but real.
        let c = trace_curve(&cubic(), &Box2::centered(1.0), 0.01).unwrap();
        let p = find_poles(&c, Axis::Y, 1e-10).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p[0].location.norm() < 1e-6);
    }

    #[test]
    fn inflections() {
        let c = trace_curve(&cubic(), &Box2::centered(1.0), 0.01).unwrap();
        let i = find_inflections(&c, 1e-10).unwrap();
        assert_eq!(i.len(), 1);
        assert!(i[0].location.norm() < 1e-10);
        let c = trace_curve(&circle(1.0), &Box2::centered(2.0), 0.01).unwrap();
        assert!(find_inflections(&c, 1e-10).unwrap().is_empty());
        let quartic = Poly2::from_terms([(0, 1, 1.0), (4, 0, -1.0)]);
        let c = trace_curve(&quartic, &Box2::centered(1.0), 0.01).unwrap();
        assert!(find_inflections(&c, 1e-10).unwrap().is_empty());
    }

    #[test]
    fn bitangent_of_w_quartic() {
        let f = Poly2::from_terms([(0, 1, 1.0), (4, 0, -1.0), (2, 0, 2.0)]);
        let c = trace_curve(&f, &Box2::new(-2.0, 2.0, -2.0, 3.0).unwrap(), 0.01).unwrap();
        let b = find_bitangents(&c, 1e-10).unwrap();
        assert_eq!(b.len(), 1, "{b:?}");
        assert!((b[0].contacts[0] - Point::new(-1.0, -1.0)).norm() < 1e-8);
        assert!((b[0].contacts[1] - Point::new(1.0, -1.0)).norm() < 1e-8);
        assert!(b[0].line.implicit[0].abs() < 1e-8);
        assert!((b[0].line.signed_distance(Point::new(0.0, -1.0))).abs() < 1e-8);
    }

    #[test]
    fn conics_have_no_bitangents() {
        for f in [circle(1.0), ellipse()] {
            let c = trace_curve(&f, &Box2::centered(3.0), 0.01).unwrap();
            assert!(find_bitangents(&c, 1e-10).unwrap().is_empty());
        }
    }

    #[test]
    fn curvature_vertices() {
        let c = trace_curve(&ellipse(), &Box2::centered(3.0), 0.01).unwrap();
        let v = find_curvature_vertices(&c, 1e-10).unwrap();
        assert_eq!(v.len(), 4, "{v:?}");
        for want in [Point::new(-2.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 1.0), Point::new(0.0, -1.0)] {
            assert!(v.iter().any(|p| p.location.dist(want) < 1e-8));
        }
        let c = trace_curve(&circle(1.0), &Box2::centered(2.0), 0.01).unwrap();
        assert!(find_curvature_vertices(&c, 1e-10).unwrap().is_empty());
        let par = Poly2::from_terms([(0, 1, 1.0), (2, 0, -1.0)]);
        let c = trace_curve(&par, &Box2::centered(2.0), 0.01).unwrap();
        let v = find_curvature_vertices(&c, 1e-10).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v[0].location.norm() < 1e-8);
    }
}
