//! Certified real-root isolation for univariate polynomials.
//!
//! The search subdivides `[lo, hi]`. A cell is discarded when a centered-form
//! enclosure of the polynomial excludes zero; it is certified to hold exactly
//! one root when the derivative enclosure excludes zero and the endpoint
//! values differ in sign. Cells that reach the tolerance without either
//! verdict are merged into clusters and resolved by examining the local
//! minimum of `|p|` (even-multiplicity roots) or a sign change.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::poly::Poly1;

/// Coefficients below this magnitude count as zero for the identically-zero test.
pub const ZERO_COEFF: f64 = 1e-13;

const MAX_DEPTH: u32 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    EvenOrUnknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootInterval {
    pub lo: f64,
    pub hi: f64,
    pub parity: Parity,
}

impl RootInterval {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// All real roots of `p` in `[lo, hi]` as disjoint sorted intervals of width
/// at most `tol`. A multiple root is one `EvenOrUnknown` interval, which may be
/// wider when `p` is indistinguishable from zero across it.
pub fn isolate_univariate_roots(p: &Poly1, lo: f64, hi: f64, tol: f64) -> Result<Vec<RootInterval>> {
    isolate(p, lo, hi, tol, true)
}

/// Like [`isolate_univariate_roots`], but root clusters that cannot be
/// separated at `tol` are reported as one `EvenOrUnknown` interval covering
/// the cluster instead of failing. Used at sweep stations, where tangencies
/// are expected.
pub fn isolate_roots_lenient(p: &Poly1, lo: f64, hi: f64, tol: f64) -> Result<Vec<RootInterval>> {
    isolate(p, lo, hi, tol, false)
}

fn isolate(p: &Poly1, lo: f64, hi: f64, tol: f64, strict: bool) -> Result<Vec<RootInterval>> {
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(Error::InvalidInput(format!("bad root search [{lo}, {hi}] tol {tol}")));
    }
    if p.coeffs().iter().all(|c| c.abs() <= ZERO_COEFF) {
        return Err(Error::IdenticallyZero);
    }
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    let dp = p.derivative();
    let mut ctx = Search { p, dp: &dp, tol, roots: Vec::new(), undecided: Vec::new() };
    ctx.visit(Interval::new(lo, hi), 0);
    let mut roots = ctx.roots;
    let clusters = merge_cells(std::mem::take(&mut ctx.undecided));
    for c in clusters {
        match resolve_cluster(p, &dp, c, tol) {
            Ok(Some(r)) => roots.push(r),
            Ok(None) => {}
            Err(Error::ToleranceTooCoarse { .. }) if !strict => roots.push(RootInterval {
                lo: c.lo,
                hi: c.hi,
                parity: Parity::EvenOrUnknown,
            }),
            Err(e) => return Err(e),
        }
    }
    roots.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    // Exact zeros on subdivision points can be reported by both neighbours.
    roots.dedup_by(|b, a| b.lo <= a.hi);
    Ok(merge_flat_runs(p, roots))
}

/// Near a multiple root `p` is pure rounding noise over a stretch much wider
/// than `tol`, and the search finds it as several even clusters. Neighbours
/// with only noise between them are one root.
fn merge_flat_runs(p: &Poly1, roots: Vec<RootInterval>) -> Vec<RootInterval> {
    let flat = |lo: f64, hi: f64| {
        (0..=16).all(|k| {
            let t = lo + (hi - lo) * k as f64 / 16.0;
            p.eval(t).abs() <= 16.0 * p.noise_at(t)
        })
    };
    let mut out: Vec<RootInterval> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last_mut() {
            Some(last)
                if last.parity == Parity::EvenOrUnknown && r.parity == Parity::EvenOrUnknown && flat(last.hi, r.lo) =>
            {
                last.hi = r.hi;
            }
            _ => out.push(r),
        }
    }
    out
}

struct Search<'a> {
    p: &'a Poly1,
    dp: &'a Poly1,
    tol: f64,
    roots: Vec<RootInterval>,
    undecided: Vec<Interval>,
}

impl Search<'_> {
    fn enclosure(&self, cell: Interval) -> Interval {
        let m = cell.mid();
        let pm = Interval::point(self.p.eval(m));
        let noise = self.p.noise_at(m);
        let centered = pm + Interval::new(-noise, noise) + self.dp.eval_interval(cell) * (cell - Interval::point(m));
        let natural = self.p.eval_interval(cell);
        centered.intersect(&natural).unwrap_or(natural)
    }

    fn visit(&mut self, cell: Interval, depth: u32) {
        if !self.enclosure(cell).contains_zero() {
            return;
        }
        let slope = self.dp.eval_interval(cell);
        if !slope.contains_zero() {
            let (a, b) = (self.p.eval(cell.lo), self.p.eval(cell.hi));
            if a == 0.0 {
                self.roots.push(exact_zero(self.p, cell.lo, self.tol));
            } else if b == 0.0 {
                self.roots.push(exact_zero(self.p, cell.hi, self.tol));
            } else if a * b < 0.0 {
                self.roots.push(refine_sign_change(self.p, cell.lo, cell.hi, self.tol));
            }
            return;
        }
        if cell.width() <= self.tol || depth >= MAX_DEPTH {
            self.undecided.push(cell);
            return;
        }
        // Slightly off-centre split keeps symmetric roots off the cut.
        let m = cell.lo + cell.width() * 0.499_972_1;
        self.visit(Interval::new(cell.lo, m), depth + 1);
        self.visit(Interval::new(m, cell.hi), depth + 1);
    }
}

/// Bisect a strict sign change down to width `tol`.
pub fn refine_sign_change(p: &Poly1, mut lo: f64, mut hi: f64, tol: f64) -> RootInterval {
    let mut flo = p.eval(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let m = 0.5 * (lo + hi);
        let fm = p.eval(m);
        if fm == 0.0 {
            return exact_zero(p, m, tol);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
    }
    RootInterval { lo, hi, parity: Parity::Odd }
}

/// Interval around a point where `p` evaluates to exactly zero; keeps a
/// strict sign bracket when one exists within `tol`.
fn exact_zero(p: &Poly1, t: f64, tol: f64) -> RootInterval {
    let h = (0.25 * tol).max(4.0 * f64::EPSILON * t.abs());
    let (a, b) = (t - h, t + h);
    if p.eval(a) * p.eval(b) < 0.0 {
        RootInterval { lo: a, hi: b, parity: Parity::Odd }
    } else {
        RootInterval { lo: t, hi: t, parity: Parity::EvenOrUnknown }
    }
}

fn merge_cells(mut cells: Vec<Interval>) -> Vec<Interval> {
    cells.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::new();
    for c in cells {
        match out.last_mut() {
            Some(last) if c.lo <= last.hi => last.hi = last.hi.max(c.hi),
            _ => out.push(c),
        }
    }
    out
}

fn resolve_cluster(p: &Poly1, dp: &Poly1, c: Interval, tol: f64) -> Result<Option<RootInterval>> {
    let (a, b) = (p.eval(c.lo), p.eval(c.hi));
    if a * b < 0.0 {
        // An odd number of roots packed closer than tol; report the sign change.
        let r = refine_sign_change(p, c.lo, c.hi, tol);
        return if c.width() <= 64.0 * tol {
            Ok(Some(r))
        } else {
            Err(Error::ToleranceTooCoarse { near: r.mid(), tol })
        };
    }
    // Same sign (or zero) at both ends: look for the extremum of p inside.
    let t = extremum_in(p, dp, c);
    let v = p.eval(t);
    let noise = 16.0 * p.noise_at(t) + 1e-15 * p.coeffs().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let ends_sign = if a != 0.0 { a } else { b };
    if v.abs() <= noise {
        let h = 0.5 * tol;
        return Ok(Some(RootInterval {
            lo: (t - h).max(c.lo),
            hi: (t + h).min(c.hi),
            parity: Parity::EvenOrUnknown,
        }));
    }
    if ends_sign != 0.0 && (v < 0.0) != (ends_sign < 0.0) {
        // Two distinct roots closer than tol on either side of t.
        return Err(Error::ToleranceTooCoarse { near: t, tol });
    }
    Ok(None)
}

/// Location of the extremum of `p` inside `c` (root of `p'`, or the endpoint
/// with the smallest |p| when `p'` keeps its sign).
fn extremum_in(p: &Poly1, dp: &Poly1, c: Interval) -> f64 {
    let (da, db) = (dp.eval(c.lo), dp.eval(c.hi));
    if da * db < 0.0 {
        return refine_sign_change(dp, c.lo, c.hi, c.width() * 1e-6).mid();
    }
    // Fall back to a dense scan.
    let n = 64;
    let mut best = (c.lo, p.eval(c.lo).abs());
    for k in 1..=n {
        let t = c.lo + c.width() * k as f64 / n as f64;
        let v = p.eval(t).abs();
        if v < best.1 {
            best = (t, v);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Poly1 {
        Poly1::new(c.to_vec())
    }

    #[test]
    fn double_root_is_one_interval() {
        let q = Poly1::from_roots(&[0.5, 0.5, -0.25, 0.9, -0.7], 1.0);
        let rs = isolate_univariate_roots(&q, -1.0, 1.0, 1e-12).unwrap();
        assert_eq!(rs.len(), 4, "{rs:?}");
        assert_eq!(rs[2].parity, Parity::EvenOrUnknown);
        assert!(rs[2].lo <= 0.5 && 0.5 <= rs[2].hi && rs[2].width() < 1e-6);
    }

    #[test]
    fn unit_roots() {
        let r = isolate_univariate_roots(&p(&[-1.0, 0.0, 1.0]), -2.0, 2.0, 1e-9).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].lo <= -1.0 && -1.0 <= r[0].hi);
        assert!(r[1].lo <= 1.0 && 1.0 <= r[1].hi);
        assert!(r.iter().all(|x| x.width() <= 1e-9 && x.parity == Parity::Odd));
    }

    #[test]
    fn no_real_roots() {
        let r = isolate_univariate_roots(&p(&[1.0, 0.0, 1.0]), -2.0, 2.0, 1e-9).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn quarter_roots() {
        // (2t - 1/2)(2t - 3/2) * 4 = 16t^2 - 16t + 3
        let r = isolate_univariate_roots(&p(&[3.0, -16.0, 16.0]), 0.0, 1.0, 1e-9).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].mid() - 0.25).abs() < 1e-9);
        assert!((r[1].mid() - 0.75).abs() < 1e-9);
    }

    #[test]
    fn double_root_is_flagged_even() {
        let r = isolate_univariate_roots(&p(&[0.25, -1.0, 1.0]), -2.0, 2.0, 1e-8).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].parity, Parity::EvenOrUnknown);
        assert!((r[0].mid() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn identically_zero_is_an_error() {
        assert!(matches!(
            isolate_univariate_roots(&p(&[0.0, 1e-15]), 0.0, 1.0, 1e-9),
            Err(Error::IdenticallyZero)
        ));
        assert!(matches!(
            isolate_univariate_roots(&Poly1::zero(), 0.0, 1.0, 1e-9),
            Err(Error::IdenticallyZero)
        ));
    }

    #[test]
    fn roots_at_endpoints_are_reported_once() {
        let r = isolate_univariate_roots(&p(&[0.0, -1.0, 1.0]), 0.0, 1.0, 1e-10).unwrap();
        assert_eq!(r.len(), 2);
    }
}
