//! Sparse bivariate and dense univariate real polynomials.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geom::{Axis, Point};
use crate::interval::Interval;

/// Sparse polynomial in `x` and `y`; keys are `(x-exponent, y-exponent)`.
///
/// Zero coefficients are never stored, so the zero polynomial is the empty map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
    // rows[i][j] = coefficient of x^i y^j, kept in sync with `terms`
    rows: Vec<Vec<f64>>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn constant(c: f64) -> Self {
        Poly2::from_terms([(0, 0, c)])
    }

    pub fn x() -> Self {
        Poly2::from_terms([(1, 0, 1.0)])
    }

    pub fn y() -> Self {
        Poly2::from_terms([(0, 1, 1.0)])
    }

    /// `(x - cx)^2 + (y - cy)^2 - r^2`, negative inside.
    pub fn circle(center: Point, r: f64) -> Self {
        let (cx, cy) = (center.x, center.y);
        Poly2::from_terms([
            (2, 0, 1.0),
            (0, 2, 1.0),
            (1, 0, -2.0 * cx),
            (0, 1, -2.0 * cy),
            (0, 0, cx * cx + cy * cy - r * r),
        ])
    }

    /// Ellipse with semi-axes `a`, `b` rotated by `angle`, normalized to be
    /// `-1` at the center.
    pub fn ellipse(center: Point, a: f64, b: f64, angle: f64) -> Self {
        let e = Poly2::from_terms([(2, 0, 1.0 / (a * a)), (0, 2, 1.0 / (b * b)), (0, 0, -1.0)]);
        e.rigid_motion(angle, center)
    }

    /// Sum of `c * x^i * y^j`; repeated exponents accumulate.
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u32, f64)>) -> Self {
        let mut p = Poly2::zero();
        for (i, j, c) in terms {
            p.accumulate(i, j, c);
        }
        p.rebuild();
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: f64) {
        self.accumulate(i, j, c);
        self.rebuild();
    }

    fn accumulate(&mut self, i: u32, j: u32, c: f64) {
        let e = self.terms.entry((i, j)).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&(i, j));
        }
    }

    fn rebuild(&mut self) {
        let (mx, _) = self.max_exp();
        let mut rows: Vec<Vec<f64>> = if self.terms.is_empty() {
            Vec::new()
        } else {
            vec![Vec::new(); mx as usize + 1]
        };
        for (&(i, j), &c) in &self.terms {
            let r = &mut rows[i as usize];
            if r.len() <= j as usize {
                r.resize(j as usize + 1, 0.0);
            }
            r[j as usize] = c;
        }
        self.rows = rows;
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.terms.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn coeff(&self, i: u32, j: u32) -> f64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.terms.keys().map(|&(i, j)| (i + j) as i32).max().unwrap_or(-1)
    }

    fn max_exp(&self) -> (u32, u32) {
        self.terms
            .keys()
            .fold((0, 0), |(a, b), &(i, j)| (a.max(i), b.max(j)))
    }

    /// Largest absolute coefficient.
    pub fn scale(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Sum of |coefficient| * |x|^i * |y|^j, a bound for rounding noise at `q`.
    pub fn magnitude_at(&self, q: Point) -> f64 {
        let (ax, ay) = (q.x.abs(), q.y.abs());
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c.abs() * ax.powi(i as i32) * ay.powi(j as i32))
            .sum()
    }

    /// Horner evaluation: rows in `y` first, then across powers of `x`.
    pub fn eval(&self, q: Point) -> f64 {
        self.rows
            .iter()
            .rev()
            .fold(0.0, |acc, r| acc * q.x + horner(r, q.y))
    }

    /// Natural interval extension in nested Horner form.
    pub fn eval_interval(&self, xs: Interval, ys: Interval) -> Interval {
        self.rows
            .iter()
            .rev()
            .fold(Interval::point(0.0), |acc, r| acc * xs + horner_interval(r, ys))
    }

    pub fn gradient(&self, q: Point) -> Point {
        Point::new(
            self.differentiate(Axis::X, 1).eval(q),
            self.differentiate(Axis::Y, 1).eval(q),
        )
    }

    /// Formal partial derivative of the given order.
    pub fn differentiate(&self, axis: Axis, order: u32) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(i, j), &c) in &self.terms {
            let e = match axis {
                Axis::X => i,
                Axis::Y => j,
            };
            if e < order {
                continue;
            }
            let mut f = c;
            for k in 0..order {
                f *= (e - k) as f64;
            }
            match axis {
                Axis::X => out.accumulate(i - order, j, f),
                Axis::Y => out.accumulate(i, j - order, f),
            }
        }
        out.rebuild();
        out
    }

    pub fn dx(&self) -> Poly2 {
        self.differentiate(Axis::X, 1)
    }

    pub fn dy(&self) -> Poly2 {
        self.differentiate(Axis::Y, 1)
    }

    pub fn powi(&self, n: u32) -> Poly2 {
        let mut out = Poly2::constant(1.0);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Poly2 {
        Poly2::from_terms(self.terms().map(|(i, j, c)| (i, j, c * s)))
    }

    /// Substitute `x -> px`, `y -> py` (both bivariate).
    pub fn compose(&self, px: &Poly2, py: &Poly2) -> Poly2 {
        let (mx, my) = self.max_exp();
        let xp: Vec<Poly2> = powers(px, mx);
        let yp: Vec<Poly2> = powers(py, my);
        let mut out = Poly2::zero();
        for (&(i, j), &c) in &self.terms {
            let t = &xp[i as usize] * &yp[j as usize];
            for (a, b, d) in t.terms() {
                out.accumulate(a, b, c * d);
            }
        }
        out.rebuild();
        out
    }

    /// The polynomial of the same curve moved by a rigid motion: rotation
    /// by `angle` about the origin followed by translation by `shift`.
    pub fn rigid_motion(&self, angle: f64, shift: Point) -> Poly2 {
        // q = R p + s  =>  p = R^T (q - s)
        let (s, c) = angle.sin_cos();
        let ux = Poly2::from_terms([(1, 0, c), (0, 1, s), (0, 0, -(c * shift.x + s * shift.y))]);
        let uy = Poly2::from_terms([(1, 0, -s), (0, 1, c), (0, 0, s * shift.x - c * shift.y)]);
        self.compose(&ux, &uy)
    }

    /// Restriction to the segment `a -> b`, parametrized by `t` in `[0, 1]`.
    pub fn restrict_to_segment(&self, a: Point, b: Point) -> Result<Poly1> {
        if a == b {
            return Err(Error::DegeneratePoints);
        }
        let d = b - a;
        Ok(self.restrict_affine(a, d))
    }

    /// `t -> p(a + t d)`.
    pub fn restrict_affine(&self, a: Point, d: Point) -> Poly1 {
        let (mx, my) = self.max_exp();
        let lx = Poly1::new(vec![a.x, d.x]);
        let ly = Poly1::new(vec![a.y, d.y]);
        let xp = poly1_powers(&lx, mx);
        let yp = poly1_powers(&ly, my);
        let mut out = Poly1::zero();
        for (&(i, j), &c) in &self.terms {
            let t = xp[i as usize].mul(&yp[j as usize]).scaled(c);
            out = out.add(&t);
        }
        out.trimmed()
    }

    /// Restriction to the line `{axis-coordinate = t}`, as a polynomial in
    /// the other coordinate.
    pub fn restrict_to_line(&self, axis: Axis, t: f64) -> Poly1 {
        let (mx, my) = self.max_exp();
        let deg = match axis {
            Axis::X => my,
            Axis::Y => mx,
        } as usize;
        let mut c = vec![0.0; deg + 1];
        // Group by the free exponent and Horner in the fixed coordinate.
        let mut groups: BTreeMap<u32, Vec<(u32, f64)>> = BTreeMap::new();
        for (&(i, j), &v) in &self.terms {
            let (fixed, free) = match axis {
                Axis::X => (i, j),
                Axis::Y => (j, i),
            };
            groups.entry(free).or_default().push((fixed, v));
        }
        for (free, list) in groups {
            let maxf = list.iter().map(|&(f, _)| f).max().unwrap_or(0) as usize;
            let mut dense = vec![0.0; maxf + 1];
            for (f, v) in list {
                dense[f as usize] += v;
            }
            c[free as usize] = horner(&dense, t);
        }
        Poly1::new(c).trimmed()
    }
}

fn powers(p: &Poly2, n: u32) -> Vec<Poly2> {
    let mut v = vec![Poly2::constant(1.0)];
    for k in 0..n as usize {
        let next = &v[k] * p;
        v.push(next);
    }
    v
}

fn poly1_powers(p: &Poly1, n: u32) -> Vec<Poly1> {
    let mut v = vec![Poly1::new(vec![1.0])];
    for k in 0..n as usize {
        let next = v[k].mul(p);
        v.push(next);
    }
    v
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * t + v)
}

fn horner_interval(c: &[f64], t: Interval) -> Interval {
    c.iter()
        .rev()
        .fold(Interval::point(0.0), |acc, &v| acc * t + Interval::point(v))
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, o: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (i, j, c) in o.terms() {
            out.accumulate(i, j, c);
        }
        out.rebuild();
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, o: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (i, j, c) in o.terms() {
            out.accumulate(i, j, -c);
        }
        out.rebuild();
        out
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, o: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (i, j, c) in self.terms() {
            for (k, l, d) in o.terms() {
                out.accumulate(i + k, j + l, c * d);
            }
        }
        out.rebuild();
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scaled(-1.0)
    }
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(self, o: Poly2) -> Poly2 {
        &self + &o
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(self, o: Poly2) -> Poly2 {
        &self - &o
    }
}

impl Mul for Poly2 {
    type Output = Poly2;
    fn mul(self, o: Poly2) -> Poly2 {
        &self * &o
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), &c) in self.terms.iter().rev() {
            let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{sign}")?;
            if !first {
                write!(f, " ")?;
            }
            let a = c.abs();
            let mono = match (i, j) {
                (0, 0) => String::new(),
                (i, 0) => format!("x^{i}"),
                (0, j) => format!("y^{j}"),
                (i, j) => format!("x^{i}*y^{j}"),
            };
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a == 1.0 {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{a}*{mono}")?;
            }
            first = false;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Poly2Json {
    monomials: Vec<(u32, u32, f64)>,
}

impl Serialize for Poly2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Poly2Json { monomials: self.terms().collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Poly2Json::deserialize(d)?;
        if let Some(bad) = raw.monomials.iter().find(|m| !m.2.is_finite()) {
            return Err(serde::de::Error::custom(format!(
                "non-finite coefficient for x^{} y^{}",
                bad.0, bad.1
            )));
        }
        Ok(Poly2::from_terms(raw.monomials))
    }
}

/// Dense univariate polynomial, coefficients by ascending exponent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly1 {
    coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly1 { coeffs }.trimmed()
    }

    pub fn zero() -> Self {
        Poly1 { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
        self
    }

    pub fn degree(&self) -> i32 {
        self.coeffs.len() as i32 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        horner(&self.coeffs, t)
    }

    pub fn eval_interval(&self, t: Interval) -> Interval {
        horner_interval(&self.coeffs, t)
    }

    /// Bound for the rounding error of `eval` at `t`.
    pub fn noise_at(&self, t: f64) -> f64 {
        let at = t.abs();
        let mag: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * at.powi(k as i32))
            .sum();
        mag * f64::EPSILON * (2.0 * self.coeffs.len() as f64 + 2.0)
    }

    pub fn derivative(&self) -> Poly1 {
        Poly1::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scaled(&self, s: f64) -> Poly1 {
        Poly1::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, o: &Poly1) -> Poly1 {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut c = vec![0.0; n];
        for (k, v) in self.coeffs.iter().enumerate() {
            c[k] += v;
        }
        for (k, v) in o.coeffs.iter().enumerate() {
            c[k] += v;
        }
        Poly1::new(c)
    }

    pub fn mul(&self, o: &Poly1) -> Poly1 {
        if self.is_zero() || o.is_zero() {
            return Poly1::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + o.coeffs.len() - 1];
        for (a, x) in self.coeffs.iter().enumerate() {
            for (b, y) in o.coeffs.iter().enumerate() {
                c[a + b] += x * y;
            }
        }
        Poly1::new(c)
    }

    /// Build from real roots and a leading coefficient.
    pub fn from_roots(roots: &[f64], lead: f64) -> Poly1 {
        roots
            .iter()
            .fold(Poly1::new(vec![lead]), |acc, &r| acc.mul(&Poly1::new(vec![-r, 1.0])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> Poly2 {
        Poly2::from_terms([(2, 0, 1.0), (0, 2, 1.0), (0, 0, -1.0)])
    }

    fn cubic() -> Poly2 {
        Poly2::from_terms([(0, 1, 1.0), (3, 0, -1.0)])
    }

    #[test]
    fn eval_examples() {
        assert_eq!(circle().eval(Point::new(1.0, 0.0)), 0.0);
        assert_eq!(Poly2::zero().eval(Point::new(3.0, 4.0)), 0.0);
        assert_eq!(cubic().eval(Point::new(2.0, 1.0)), -7.0);
    }

    #[test]
    fn degree_conventions() {
        assert_eq!(Poly2::zero().degree(), -1);
        assert_eq!(circle().degree(), 2);
        let p = Poly2::from_terms([(1, 0, 1.0), (1, 0, -1.0)]);
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
    }

    #[test]
    fn differentiate_examples() {
        assert_eq!(circle().differentiate(Axis::Y, 1), Poly2::from_terms([(0, 1, 2.0)]));
        assert_eq!(cubic().differentiate(Axis::X, 2), Poly2::from_terms([(1, 0, -6.0)]));
        assert!(Poly2::constant(5.0).differentiate(Axis::X, 1).is_zero());
        assert!(cubic().differentiate(Axis::X, 4).is_zero());
    }

    #[test]
    fn restrict_examples() {
        let r = circle()
            .restrict_to_segment(Point::new(-2.0, 0.0), Point::new(2.0, 0.0))
            .unwrap();
        assert_eq!(r.coeffs(), &[3.0, -16.0, 16.0]);
        let y = Poly2::y()
            .restrict_to_segment(Point::new(0.0, 1.0), Point::new(1.0, 1.0))
            .unwrap();
        assert_eq!(y.coeffs(), &[1.0]);
        let x = Poly2::x()
            .restrict_to_segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0))
            .unwrap();
        assert_eq!(x.coeffs(), &[0.0, 1.0]);
        assert!(matches!(
            circle().restrict_to_segment(Point::new(1.0, 1.0), Point::new(1.0, 1.0)),
            Err(Error::DegeneratePoints)
        ));
    }

    #[test]
    fn restrict_to_line_matches_eval() {
        let p = Poly2::from_terms([(3, 1, 0.5), (1, 2, -2.0), (0, 0, 1.0), (2, 0, 3.0)]);
        let l = p.restrict_to_line(Axis::X, 0.7);
        let m = p.restrict_to_line(Axis::Y, -0.3);
        for &s in &[-1.0, 0.2, 1.5] {
            assert!((l.eval(s) - p.eval(Point::new(0.7, s))).abs() < 1e-12);
            assert!((m.eval(s) - p.eval(Point::new(s, -0.3))).abs() < 1e-12);
        }
    }

    #[test]
    fn rigid_motion_moves_points() {
        let c = circle().rigid_motion(0.4, Point::new(2.0, -1.0));
        assert!(c.eval(Point::new(3.0, -1.0)).abs() < 1e-12);
        let e = Poly2::from_terms([(2, 0, 0.25), (0, 2, 1.0), (0, 0, -1.0)]);
        let a = std::f64::consts::FRAC_PI_6;
        let r = e.rigid_motion(a, Point::new(0.0, 0.0));
        let q = Point::new(2.0 * a.cos(), 2.0 * a.sin());
        assert!(r.eval(q).abs() < 1e-12);
    }

    #[test]
    fn interval_eval_encloses_point_values() {
        let p = Poly2::from_terms([(3, 1, 0.5), (1, 2, -2.0), (0, 0, 1.0)]);
        let iv = p.eval_interval(Interval::new(-0.5, 0.25), Interval::new(0.1, 0.9));
        for k in 0..=10 {
            for l in 0..=10 {
                let q = Point::new(-0.5 + 0.075 * k as f64, 0.1 + 0.08 * l as f64);
                assert!(iv.contains(p.eval(q)));
            }
        }
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&cubic()).unwrap();
        assert_eq!(s, r#"{"monomials":[[0,1,1.0],[3,0,-1.0]]}"#);
        let back: Poly2 = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cubic());
    }
}
