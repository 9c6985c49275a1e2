//! Removing inflections, bitangent contacts and curvature vertices from the
//! boundary by carving out small disks.
//!
//! Each defect is covered by a "cap" circle: a circle whose center sits just
//! outside the domain, so that only a short arc of it enters the domain.
//! The arc is kept away from the four points where a circle has an
//! axis-parallel tangent, which means the carved domain gains no new poles
//! on its boundary. Its only new characteristic points are the two corners
//! where the circle meets the old boundary, and the fiber passes straight
//! through those, so both Poincaré-Reeb graphs keep their shape.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::curvegeo::{CharKind, CharPoint};
use crate::domain::{build_domain, Domain, FlagOptions, Scene};
use crate::error::{Error, Result};
use crate::geom::{Axis, Box2, Point};
use crate::poly::Poly2;
use crate::reeb::{homeomorphic, poincare_reeb, IsoMode, VDigraph};
use crate::systems::{solve_pair, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Nip,
    Ndtl,
    Ncv,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Nip => "nip",
            Mode::Ndtl => "ndtl",
            Mode::Ncv => "ncv",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "nip" => Ok(Mode::Nip),
            "ndtl" => Ok(Mode::Ndtl),
            "ncv" => Ok(Mode::Ncv),
            _ => Err(Error::InvalidInput(format!("unknown surgery mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurgeryCase {
    /// The defect lies on a single boundary curve.
    SingleCurve,
    /// The defect is a corner where two curves cross.
    AtCrossing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeryPlan {
    pub mode: Mode,
    pub target: CharPoint,
    pub conic: Poly2,
    pub center: Point,
    pub radii: (f64, f64),
    /// Where the circle meets the old boundary.
    pub contacts: [Point; 2],
    pub case: SurgeryCase,
}

impl SurgeryPlan {
    pub fn radius(&self) -> f64 {
        self.radii.0
    }

    /// Whether `q` lies in the closed disk.
    pub fn covers(&self, q: Point) -> bool {
        q.dist(self.center) <= self.radius()
    }
}

const MAX_HALVINGS: usize = 40;
const JITTERS: usize = 9;
/// Golden angle, for a deterministic spread of jitter directions.
const GOLDEN: f64 = 2.399_963_229_728_653;

/// Boundary points violating `mode`.
pub fn defects(domain: &Domain, mode: Mode, opts: FlagOptions) -> Result<Vec<CharPoint>> {
    let mut out = match mode {
        Mode::Nip => domain.boundary_inflections()?,
        Mode::Ncv => domain.boundary_curvature_vertices()?,
        Mode::Ndtl => domain
            .ndtl_witnesses(opts)?
            .into_iter()
            .map(|w| CharPoint {
                kind: CharKind::BitangentContact,
                location: w.point,
                curves: vec![w.curve],
                radius: 0.0,
                residual: w.bitangent.residual,
            })
            .collect(),
    };
    let eps = 1e-7 * domain.scene.length_scale();
    let mut uniq: Vec<CharPoint> = Vec::new();
    out.sort_by(|a, b| a.location.x.total_cmp(&b.location.x).then(a.location.y.total_cmp(&b.location.y)));
    for p in out {
        if !uniq.iter().any(|q| q.location.dist(p.location) <= eps) {
            uniq.push(p);
        }
    }
    Ok(uniq)
}

/// Every characteristic point the sweep knows about, on the closure or not.
fn all_events(domain: &Domain) -> Vec<Point> {
    let mut v: Vec<Point> = domain.crossings.iter().map(|c| c.point.location).collect();
    for axis in Axis::both() {
        v.extend(domain.poles[axis as usize].iter().map(|p| p.point.location));
    }
    v
}

fn is_pole(domain: &Domain, q: Point) -> bool {
    let eps = 1e-6 * domain.scene.length_scale();
    domain.poles.iter().flatten().any(|p| p.point.location.dist(q) <= eps)
}

fn at_crossing(domain: &Domain, q: Point) -> bool {
    let eps = 1e-6 * domain.scene.length_scale();
    domain.crossings.iter().any(|c| c.point.location.dist(q) <= eps)
}

/// Plans a cap circle covering `target`.
pub fn plan_disk(domain: &Domain, target: &CharPoint, mode: Mode) -> Result<SurgeryPlan> {
    plan_disk_within(domain, target, mode, f64::INFINITY, &[])
}

/// Like [`plan_disk`] with the radius capped at `r_max` and `others`
/// (further defects) kept out of the disk.
pub fn plan_disk_within(domain: &Domain, target: &CharPoint, mode: Mode, r_max: f64, others: &[Point]) -> Result<SurgeryPlan> {
    let q = target.location;
    if is_pole(domain, q) {
        return Err(Error::HypothesisViolated(format!("defect at {q} is a pole")));
    }
    let case = if at_crossing(domain, q) { SurgeryCase::AtCrossing } else { SurgeryCase::SingleCurve };
    let scale = domain.scene.length_scale();
    let events = all_events(domain);
    let nearest = events
        .iter()
        .chain(others)
        .map(|p| p.dist(q))
        .filter(|&d| d > 1e-6 * scale)
        .fold(domain.scene.bbox.boundary_distance(q), f64::min);
    let mut r = (0.5 * nearest).min(0.1 * scale).min(r_max);
    for _ in 0..MAX_HALVINGS {
        if let Some(plan) = try_radius(domain, target, mode, case, r, &events, others)? {
            return Ok(plan);
        }
        r *= 0.5;
    }
    Err(Error::NoValidRadius(q))
}

fn try_radius(
    domain: &Domain,
    target: &CharPoint,
    mode: Mode,
    case: SurgeryCase,
    r: f64,
    events: &[Point],
    others: &[Point],
) -> Result<Option<SurgeryPlan>> {
    let q = target.location;
    let Some(inward) = inward_angle(domain, q, 0.25 * r) else { return Ok(None) };
    // Half the angular room between the inward direction and the nearest
    // axis direction bounds the arc that may enter the domain.
    let room = (inward.rem_euclid(FRAC_PI_2)).min(FRAC_PI_2 - inward.rem_euclid(FRAC_PI_2));
    let alpha = 0.5 * room;
    let d = r * alpha.cos();
    let base = q - Point::new(inward.cos(), inward.sin()) * d;
    for k in 0..JITTERS {
        let a = k as f64 * GOLDEN;
        let jitter = Point::new(a.cos(), a.sin()) * (0.1 * r * (k as f64 / JITTERS as f64).sqrt() * (1.0 - alpha.cos()).max(0.05));
        let center = base + jitter;
        if let Some(plan) = check_candidate(domain, target, mode, case, center, r, events, others)? {
            return Ok(Some(plan));
        }
    }
    Ok(None)
}

/// Circular mean of the directions from `q` into the domain at distance `rho`.
fn inward_angle(domain: &Domain, q: Point, rho: f64) -> Option<f64> {
    let mut sum = Point::new(0.0, 0.0);
    let mut hits = 0;
    for k in 0..72 {
        let a = k as f64 * PI / 36.0 + 0.013;
        let u = Point::new(a.cos(), a.sin());
        if domain.scene.bbox.strictly_contains(q + u * rho) && domain.contains_point(q + u * rho).unwrap_or(false) {
            sum = sum + u;
            hits += 1;
        }
    }
    (hits > 0 && sum.norm() > 1e-9).then(|| sum.angle())
}

#[allow(clippy::too_many_arguments)]
fn check_candidate(
    domain: &Domain,
    target: &CharPoint,
    mode: Mode,
    case: SurgeryCase,
    c: Point,
    r: f64,
    events: &[Point],
    others: &[Point],
) -> Result<Option<SurgeryPlan>> {
    let q = target.location;
    let scene = &domain.scene;
    let scale = scene.length_scale();
    let bb = &scene.bbox;
    let margin = 1e-6 * scale;
    if r - q.dist(c) <= 1e-5 * scale || scene.seed.dist(c) <= r * (1.0 + 1e-9) {
        return Ok(None);
    }
    if c.x - r <= bb.x_lo + margin || c.x + r >= bb.x_hi - margin || c.y - r <= bb.y_lo + margin || c.y + r >= bb.y_hi - margin {
        return Ok(None);
    }
    // No other characteristic point may be swallowed or touched.
    let far = |p: &Point| p.dist(q) <= 1e-6 * scale || (p.dist(c) - r).abs() > margin && p.dist(c) > r;
    if !events.iter().chain(others).all(far) {
        return Ok(None);
    }
    // The circle's own poles must stay outside the closure.
    let poles = [c + Point::new(r, 0.0), c - Point::new(r, 0.0), c + Point::new(0.0, r), c - Point::new(0.0, r)];
    for p in poles {
        match domain.contains_point(p) {
            Ok(false) => {}
            _ => return Ok(None),
        }
    }
    let conic = Poly2::circle(c, r);
    let region = Box2 { x_lo: c.x - 1.05 * r, x_hi: c.x + 1.05 * r, y_lo: c.y - 1.05 * r, y_hi: c.y + 1.05 * r };
    let opts = SolveOptions::with_tol(scene.tol.solver * scale);
    let mut contacts = Vec::new();
    for (k, f) in scene.curves.iter().enumerate() {
        let Ok(sols) = solve_pair(f, &conic, &region, &opts) else { return Ok(None) };
        for s in sols {
            let p = s.point();
            let gf = domain.curves[k].d.grad(p);
            let gc = p - c;
            if gf.cross(gc).abs() <= 1e-3 * gf.norm() * gc.norm() {
                return Ok(None);
            }
            match domain.closure_contains_point(p) {
                Ok(true) => contacts.push(p),
                Ok(false) => {}
                Err(_) => return Ok(None),
            }
        }
    }
    if contacts.len() != 2 || contacts.iter().any(|p| p.dist(q) <= 1e-6 * r) {
        return Ok(None);
    }
    let chord = contacts[1] - contacts[0];
    if case == SurgeryCase::AtCrossing && (chord.x.abs() <= 1e-3 * chord.norm() || chord.y.abs() <= 1e-3 * chord.norm()) {
        return Ok(None);
    }
    // Keep the new critical values apart from the existing ones.
    let gap = 1e-7 * scale;
    for axis in Axis::both() {
        let new_t = [contacts[0].coord(axis), contacts[1].coord(axis), c.coord(axis) - r, c.coord(axis) + r];
        if new_t.iter().any(|t| events.iter().any(|e| (e.coord(axis) - t).abs() <= gap)) {
            return Ok(None);
        }
        if (contacts[0].coord(axis) - contacts[1].coord(axis)).abs() <= gap {
            return Ok(None);
        }
    }
    Ok(Some(SurgeryPlan {
        mode,
        target: target.clone(),
        conic,
        center: c,
        radii: (r, r),
        contacts: [contacts[0], contacts[1]],
        case,
    }))
}

/// The domain with the plan's closed disk removed.
pub fn apply_plan(domain: &Domain, plan: &SurgeryPlan) -> Result<Domain> {
    if plan.covers(domain.scene.seed) {
        return Err(Error::SeedSwallowed);
    }
    let mut curves = domain.scene.curves.clone();
    curves.push(plan.conic.clone());
    let scene = Scene { curves, ..domain.scene.clone() };
    let out = build_domain(&scene).map_err(|e| Error::ValidationFailed(e.to_string()))?;
    match out.closure_contains_point(plan.target.location) {
        Ok(false) => Ok(out),
        Ok(true) => Err(Error::ValidationFailed(format!("{} is still on the boundary", plan.target.location))),
        Err(e) => Err(Error::ValidationFailed(e.to_string())),
    }
}

#[derive(Clone, Debug)]
pub struct Desingularized {
    pub domain: Domain,
    pub plans: Vec<SurgeryPlan>,
    pub initial_defects: usize,
}

/// Graphs of both projections.
pub fn graphs(domain: &Domain) -> Result<[VDigraph; 2]> {
    Ok([poincare_reeb(domain, Axis::X)?, poincare_reeb(domain, Axis::Y)?])
}

/// Whether two domains have the same Poincaré-Reeb graphs up to vertices
/// the fiber passes straight through.
pub fn same_graphs(a: &[VDigraph; 2], b: &[VDigraph; 2], tol: f64) -> Result<Option<Axis>> {
    for axis in Axis::both() {
        let k = axis as usize;
        if !homeomorphic(&a[k], &b[k], IsoMode::HeightOrder, tol)? {
            return Ok(Some(axis));
        }
    }
    Ok(None)
}

/// Carves out every boundary defect of `mode`, one disk at a time.
pub fn desingularize(domain: &Domain, mode: Mode, opts: FlagOptions) -> Result<Desingularized> {
    let morse = domain.classify_morse();
    if !morse.morse {
        return Err(Error::HypothesisViolated("domain is not Morse".into()));
    }
    let before = graphs(domain).map_err(|e| Error::HypothesisViolated(e.to_string()))?;
    let mut found = defects(domain, mode, opts)?;
    if let Some(p) = found.iter().find(|p| is_pole(domain, p.location)) {
        return Err(Error::HypothesisViolated(format!("defect at {} is a pole", p.location)));
    }
    let initial = found.len();
    let cap = 8 * initial.max(1);
    let tol = 10.0 * domain.scene.tol.solver * domain.scene.length_scale();
    let mut current = domain.clone();
    let mut plans = Vec::new();
    while let Some(target) = found.first().cloned() {
        if plans.len() >= cap {
            return Err(Error::NotConverged(plans.len()));
        }
        let rest: Vec<Point> = found[1..].iter().map(|p| p.location).collect();
        let mut r_max = f64::INFINITY;
        let mut step = None;
        let mut last_err = None;
        for _ in 0..8 {
            let plan = plan_disk_within(&current, &target, mode, r_max, &rest)?;
            r_max = 0.5 * plan.radius();
            let next = match apply_plan(&current, &plan) {
                Ok(d) => d,
                Err(e @ (Error::ValidationFailed(_) | Error::SeedSwallowed)) => {
                    last_err = Some(e);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let after = match graphs(&next) {
                Ok(g) => g,
                Err(e) => {
                    last_err = Some(Error::ValidationFailed(e.to_string()));
                    continue;
                }
            };
            if let Some(axis) = same_graphs(&before, &after, tol)? {
                last_err = Some(Error::GraphChanged(axis.name()));
                continue;
            }
            let remaining = defects(&next, mode, opts)?;
            if remaining.len() >= found.len() {
                last_err = Some(Error::ValidationFailed(format!("defect count did not drop below {}", found.len())));
                continue;
            }
            step = Some((plan, next, remaining));
            break;
        }
        let Some((plan, next, remaining)) = step else {
            return Err(last_err.unwrap_or(Error::NoValidRadius(target.location)));
        };
        plans.push(plan);
        current = next;
        found = remaining;
    }
    let after = graphs(&current)?;
    if let Some(axis) = same_graphs(&before, &after, tol)? {
        return Err(Error::GraphChanged(axis.name()));
    }
    Ok(Desingularized { domain: current, plans, initial_defects: initial })
}
