//! Planar points and axis-aligned boxes.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point { x: a[0], y: a[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    pub fn coord(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    /// Coordinate orthogonal to `axis`.
    pub fn other(self, axis: Axis) -> f64 {
        self.coord(axis.other())
    }

    /// Build a point from (sweep coordinate, orthogonal coordinate).
    pub fn from_axis(axis: Axis, along: f64, across: f64) -> Point {
        match axis {
            Axis::X => Point::new(along, across),
            Axis::Y => Point::new(across, along),
        }
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.x, self.y)
    }
}

/// Coordinate direction; `X` is the first projection, `Y` the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }

    pub fn both() -> [Axis; 2] {
        [Axis::X, Axis::Y]
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

/// Axis-aligned work region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Box2 {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl TryFrom<[f64; 4]> for Box2 {
    type Error = Error;
    fn try_from(a: [f64; 4]) -> Result<Self> {
        Box2::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Box2> for [f64; 4] {
    fn from(b: Box2) -> Self {
        [b.x_lo, b.x_hi, b.y_lo, b.y_hi]
    }
}

impl Box2 {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        let finite = [x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite());
        if !finite || x_lo >= x_hi || y_lo >= y_hi {
            return Err(Error::InvalidInput(format!(
                "box [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}] is empty or not finite"
            )));
        }
        Ok(Box2 { x_lo, x_hi, y_lo, y_hi })
    }

    /// Square box `[-r, r]^2`.
    pub fn centered(r: f64) -> Self {
        Box2::new(-r, r, -r, r).expect("positive radius")
    }

    pub fn xs(&self) -> Interval {
        Interval::new(self.x_lo, self.x_hi)
    }

    pub fn ys(&self) -> Interval {
        Interval::new(self.y_lo, self.y_hi)
    }

    pub fn range(&self, axis: Axis) -> Interval {
        match axis {
            Axis::X => self.xs(),
            Axis::Y => self.ys(),
        }
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x_lo + self.x_hi), 0.5 * (self.y_lo + self.y_hi))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.x_lo <= p.x && p.x <= self.x_hi && self.y_lo <= p.y && p.y <= self.y_hi
    }

    pub fn strictly_contains(&self, p: Point) -> bool {
        self.x_lo < p.x && p.x < self.x_hi && self.y_lo < p.y && p.y < self.y_hi
    }

    /// Distance from `p` (inside the box) to the box boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        (p.x - self.x_lo).min(self.x_hi - p.x).min(p.y - self.y_lo).min(self.y_hi - p.y)
    }

    pub fn intersect(&self, o: &Box2) -> Option<Box2> {
        Box2::new(
            self.x_lo.max(o.x_lo),
            self.x_hi.min(o.x_hi),
            self.y_lo.max(o.y_lo),
            self.y_hi.min(o.y_hi),
        )
        .ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_rejects_empty() {
        assert!(Box2::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Box2::new(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(Box2::new(0.0, f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn axis_helpers_roundtrip() {
        let p = Point::from_axis(Axis::Y, 2.0, 3.0);
        assert_eq!(p, Point::new(3.0, 2.0));
        assert_eq!(p.coord(Axis::Y), 2.0);
        assert_eq!(p.other(Axis::Y), 3.0);
    }
}
