//! Certified solution of small square polynomial systems in boxes.
//!
//! Branch and prune: boxes are excluded by interval evaluation, contracted
//! and certified by the Krawczyk operator, and bisected along their widest
//! side otherwise. Every certified root is polished by damped Newton.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Box2, Point};
use crate::interval::Interval;
use crate::poly::Poly2;

/// A square system `F: R^n -> R^n` with point and interval evaluators.
pub trait System {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    /// Row-major Jacobian, `n x n`.
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64>;
    fn eval_box(&self, b: &[Interval]) -> Vec<Interval>;
    fn jacobian_box(&self, b: &[Interval]) -> Vec<Vec<Interval>>;
}

/// Two bivariate polynomial equations in `(x, y)`.
pub struct PolySystem2 {
    eqs: [Poly2; 2],
    grads: [[Poly2; 2]; 2],
}

impl PolySystem2 {
    pub fn new(f: Poly2, g: Poly2) -> Self {
        let grads = [[f.dx(), f.dy()], [g.dx(), g.dy()]];
        PolySystem2 { eqs: [f, g], grads }
    }

    pub fn equations(&self) -> &[Poly2; 2] {
        &self.eqs
    }
}

impl System for PolySystem2 {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let p = Point::new(x[0], x[1]);
        self.eqs.iter().map(|e| e.eval(p)).collect()
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let p = Point::new(x[0], x[1]);
        DMatrix::from_fn(2, 2, |i, j| self.grads[i][j].eval(p))
    }

    fn eval_box(&self, b: &[Interval]) -> Vec<Interval> {
        self.eqs.iter().map(|e| e.eval_interval(b[0], b[1])).collect()
    }

    fn jacobian_box(&self, b: &[Interval]) -> Vec<Vec<Interval>> {
        self.grads
            .iter()
            .map(|row| row.iter().map(|g| g.eval_interval(b[0], b[1])).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedPoint {
    pub location: Vec<f64>,
    pub radius: f64,
    pub residual: f64,
}

impl CertifiedPoint {
    pub fn point(&self) -> Point {
        Point::new(self.location[0], self.location[1])
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Residual bound for accepted roots.
    pub tol: f64,
    /// Maximum number of processed boxes.
    pub budget: usize,
    /// Boxes narrower than this that are still undecided are clusters.
    pub cluster_width: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, budget: 400_000, cluster_width: 1e-10 }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Default::default() }
    }
}

/// Convenience wrapper: all solutions of `{f = 0, g = 0}` in `region`.
pub fn solve_pair(f: &Poly2, g: &Poly2, region: &Box2, opts: &SolveOptions) -> Result<Vec<CertifiedPoint>> {
    let sys = PolySystem2::new(f.clone(), g.clone());
    solve_system(&sys, &[region.xs(), region.ys()], opts)
}

struct Queued {
    width: f64,
    seq: usize,
    cell: Vec<Interval>,
}

impl PartialEq for Queued {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Queued {
    fn cmp(&self, o: &Self) -> Ordering {
        // Widest first; FIFO among equal widths.
        self.width
            .total_cmp(&o.width)
            .then_with(|| o.seq.cmp(&self.seq))
    }
}

fn max_width(b: &[Interval]) -> f64 {
    b.iter().map(|i| i.width()).fold(0.0, f64::max)
}

fn mid(b: &[Interval]) -> Vec<f64> {
    b.iter().map(|i| i.mid()).collect()
}

fn residual(f: &[f64]) -> f64 {
    f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

enum Krawczyk {
    Empty,
    Unique(Vec<Interval>),
    Contracted(Vec<Interval>),
    NoInfo,
}

fn krawczyk(sys: &dyn System, b: &[Interval]) -> Krawczyk {
    let n = b.len();
    let m = mid(b);
    let jm = sys.jacobian(&m);
    let Some(y) = jm.clone().try_inverse() else {
        return Krawczyk::NoInfo;
    };
    if y.iter().any(|v| !v.is_finite()) {
        return Krawczyk::NoInfo;
    }
    // F(m) must be enclosed, not just evaluated, for the test to be rigorous.
    let mbox: Vec<Interval> = m.iter().map(|&v| Interval::point(v)).collect();
    let fm = sys.eval_box(&mbox);
    let jb = sys.jacobian_box(b);
    let mut k = Vec::with_capacity(n);
    for i in 0..n {
        // m_i - (Y F(m))_i
        let mut acc = Interval::point(m[i]);
        for j in 0..n {
            acc = acc - Interval::point(y[(i, j)]) * fm[j];
        }
        // + sum_j (I - Y J(B))_{ij} (B_j - m_j)
        for j in 0..n {
            let mut c = Interval::point(if i == j { 1.0 } else { 0.0 });
            for l in 0..n {
                c = c - Interval::point(y[(i, l)]) * jb[l][j];
            }
            acc = acc + c * (b[j] - Interval::point(m[j]));
        }
        k.push(acc);
    }
    let mut inter = Vec::with_capacity(n);
    for i in 0..n {
        match k[i].intersect(&b[i]) {
            Some(v) => inter.push(v),
            None => return Krawczyk::Empty,
        }
    }
    if k.iter().zip(b).all(|(ki, bi)| ki.interior_of(bi)) {
        return Krawczyk::Unique(k);
    }
    Krawczyk::Contracted(inter)
}

/// All solutions of `sys` in `domain`, sorted lexicographically.
pub fn solve_system(sys: &dyn System, domain: &[Interval], opts: &SolveOptions) -> Result<Vec<CertifiedPoint>> {
    solve_inner(sys, domain, opts, false).map(|s| s.regular)
}

/// Solutions split into certified regular ones and degenerate ones.
#[derive(Clone, Debug, Default)]
pub struct Solutions {
    pub regular: Vec<CertifiedPoint>,
    /// Points where the system vanishes to tolerance but the Jacobian is
    /// singular, so uniqueness cannot be certified.
    pub degenerate: Vec<CertifiedPoint>,
}

/// Like [`solve_system`], but degenerate solutions are returned instead of
/// aborting with `SingularCluster`.
pub fn solve_system_lenient(sys: &dyn System, domain: &[Interval], opts: &SolveOptions) -> Result<Solutions> {
    solve_inner(sys, domain, opts, true)
}

fn solve_inner(sys: &dyn System, domain: &[Interval], opts: &SolveOptions, lenient: bool) -> Result<Solutions> {
    let n = sys.dim();
    if !(1..=4).contains(&n) || domain.len() != n {
        return Err(Error::InvalidInput(format!("system of dimension {n} on a {}-box", domain.len())));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("solver tolerance must be positive".into()));
    }
    let scale = domain.iter().map(|i| i.mag()).fold(1.0f64, f64::max);
    let cluster_width = opts.cluster_width * scale;
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Queued { width: max_width(domain), seq, cell: domain.to_vec() });
    let mut found: Vec<CertifiedPoint> = Vec::new();
    let mut clusters: Vec<Vec<Interval>> = Vec::new();
    let mut degenerate: Vec<CertifiedPoint> = Vec::new();
    let mut processed = 0usize;
    let near_degenerate = |degenerate: &[CertifiedPoint], cell: &[Interval]| {
        degenerate.iter().any(|d| {
            d.location.iter().zip(cell).all(|(v, c)| c.lo - d.radius <= *v && *v <= c.hi + d.radius)
        })
    };

    while let Some(Queued { cell, .. }) = heap.pop() {
        processed += 1;
        if processed > opts.budget {
            return Err(Error::BudgetExceeded { budget: opts.budget });
        }
        if sys.eval_box(&cell).iter().any(|v| !v.contains_zero()) {
            continue;
        }
        if near_degenerate(&degenerate, &cell) {
            continue;
        }
        let w = max_width(&cell);
        let mut next = cell.clone();
        // Inflating the test box keeps roots on a cut line certifiable.
        let grown: Vec<Interval> = cell
            .iter()
            .map(|i| Interval::new(i.lo - 0.05 * i.width(), i.hi + 0.05 * i.width()))
            .collect();
        match krawczyk(sys, &grown) {
            Krawczyk::Empty => continue,
            Krawczyk::Unique(k) => {
                let start = mid(&k);
                let mut pt = polish_newton(sys, &start, opts.tol)
                    .or_else(|_| polish_newton(sys, &mid(&cell), opts.tol))?;
                // Newton must land inside the certified box.
                let inside = pt
                    .location
                    .iter()
                    .zip(&k)
                    .all(|(v, ki)| ki.lo - 1e-12 * scale <= *v && *v <= ki.hi + 1e-12 * scale);
                if !inside {
                    if lenient {
                        degenerate.push(CertifiedPoint { radius: 1e-6 * scale, ..pt });
                        continue;
                    }
                    return Err(Error::SingularCluster { at: start });
                }
                // The root is unique in K and Newton converged inside it, so the
                // Newton step bound is the sharper radius.
                pt.radius = pt.radius.min(max_width(&k)).max(1e-15 * scale);
                let in_domain = pt.location.iter().zip(domain).all(|(v, d)| d.contains(*v));
                let dup = |f: &CertifiedPoint| dist(&f.location, &pt.location) <= (2.0 * f.radius.max(pt.radius)).max(1e-12 * scale);
                if in_domain && !found.iter().any(dup) {
                    found.push(pt);
                }
                continue;
            }
            Krawczyk::Contracted(c) => {
                let c: Option<Vec<Interval>> = c.iter().zip(&cell).map(|(a, b)| a.intersect(b)).collect();
                match c {
                    None => continue,
                    Some(c) if max_width(&c) < 0.8 * w => next = c,
                    Some(_) => {}
                }
            }
            Krawczyk::NoInfo => {}
        }
        let w = max_width(&next);
        if w < cluster_width {
            clusters.push(next);
            continue;
        }
        if w < 1e-6 * scale {
            if let Some(p) = check_degenerate(sys, &next, opts, scale) {
                if !lenient {
                    return Err(Error::SingularCluster { at: p.location });
                }
                degenerate.push(CertifiedPoint { radius: 1e-6 * scale, ..p });
                continue;
            }
        }
        let (axis, _) = next
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.width().total_cmp(&b.1.width()))
            .unwrap();
        // Off-centre cut keeps symmetric solutions away from box edges.
        let iv = next[axis];
        let cut = iv.lo + 0.499_972_1 * iv.width();
        for half in [Interval::new(iv.lo, cut), Interval::new(cut, iv.hi)] {
            let mut c = next.clone();
            c[axis] = half;
            seq += 1;
            heap.push(Queued { width: max_width(&c), seq, cell: c });
        }
    }

    for c in clusters {
        let centre = mid(&c);
        let covered = found.iter().any(|f| dist(&f.location, &centre) <= 1e-8 * scale);
        if covered || near_degenerate(&degenerate, &c) {
            continue;
        }
        if !lenient {
            return Err(Error::SingularCluster { at: centre });
        }
        let res = residual(&sys.eval(&centre));
        if res <= opts.tol {
            degenerate.push(CertifiedPoint { location: centre, radius: max_width(&c).max(cluster_width), residual: res });
        }
    }
    sort_points(&mut found);
    sort_points(&mut degenerate);
    Ok(Solutions { regular: found, degenerate })
}

fn sort_points(v: &mut [CertifiedPoint]) {
    v.sort_by(|a, b| {
        a.location
            .iter()
            .zip(&b.location)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
}

/// Fail fast on tangential solutions instead of subdividing them to the
/// cluster width.
fn check_degenerate(sys: &dyn System, b: &[Interval], opts: &SolveOptions, scale: f64) -> Option<CertifiedPoint> {
    let m = mid(b);
    let p = polish_newton_raw(sys, &m, opts.tol, false).ok()?;
    let near = p.location.iter().zip(b).all(|(v, bi)| (v - bi.mid()).abs() <= 4.0 * bi.width() + 1e-9 * scale);
    if !near {
        return None;
    }
    let sv = sys.jacobian(&p.location).singular_values();
    (sv.max() > 0.0 && sv.min() <= 1e-9 * sv.max()).then_some(p)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Damped Newton iteration from `start` until the residual is at most `tol`.
pub fn polish_newton(sys: &dyn System, start: &[f64], tol: f64) -> Result<CertifiedPoint> {
    polish_newton_raw(sys, start, tol, true)
}

fn polish_newton_raw(sys: &dyn System, start: &[f64], tol: f64, strict_jacobian: bool) -> Result<CertifiedPoint> {
    let n = sys.dim();
    let mut x = DVector::from_column_slice(start);
    let mut f = DVector::from_vec(sys.eval(x.as_slice()));
    let mut res = residual(f.as_slice());
    let mut last_step = f64::INFINITY;
    for _ in 0..60 {
        let j = sys.jacobian(x.as_slice());
        let lu = j.clone().lu();
        let Some(dx) = lu.solve(&(-&f)) else {
            return Err(Error::SingularJacobian { at: x.as_slice().to_vec() });
        };
        if dx.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularJacobian { at: x.as_slice().to_vec() });
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = &x + &dx * lambda;
            let fc = DVector::from_vec(sys.eval(cand.as_slice()));
            let rc = residual(fc.as_slice());
            if rc < res || (rc <= tol && rc <= res * 1.0000001) || (res == 0.0 && rc == 0.0) {
                last_step = dx.norm() * lambda;
                x = cand;
                f = fc;
                res = rc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        let xnorm = x.norm().max(1.0);
        if res <= tol && (last_step <= 1e-13 * xnorm || !accepted || res == 0.0) {
            break;
        }
        if !accepted {
            break;
        }
    }
    if res > tol || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged { start: start.to_vec() });
    }
    if strict_jacobian {
        let sv = sys.jacobian(x.as_slice()).singular_values();
        if sv.max() == 0.0 || sv.min() <= 1e-14 * sv.max() {
            return Err(Error::SingularJacobian { at: x.as_slice().to_vec() });
        }
    }
    let radius = if last_step.is_finite() { 2.0 * last_step } else { 0.0 };
    let radius = radius.max(4.0 * f64::EPSILON * x.norm().max(1.0) * n as f64);
    Ok(CertifiedPoint { location: x.as_slice().to_vec(), radius, residual: res })
}
