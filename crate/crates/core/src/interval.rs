//! Closed real intervals with outward rounding.
//!
//! Every arithmetic result is widened by one ulp in each direction, so the
//! true real-valued result of the operation on any members of the operands
//! is contained in the returned interval.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[inline]
fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

#[inline]
fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "bad interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Smallest interval containing both endpoints regardless of order.
    pub fn hull(a: f64, b: f64) -> Self {
        Interval { lo: a.min(b), hi: a.max(b) }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn rad(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    /// `self` lies strictly inside `other`.
    pub fn interior_of(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn powi(self, n: u32) -> Interval {
        match n {
            0 => Interval::point(1.0),
            1 => self,
            _ => {
                if n.is_multiple_of(2) {
                    let m = self.lo.abs().max(self.hi.abs());
                    let l = if self.contains_zero() { 0.0 } else { self.lo.abs().min(self.hi.abs()) };
                    let hi = up(m.powi(n as i32) * (1.0 + 4.0 * f64::EPSILON * n as f64));
                    let lo = (l.powi(n as i32) * (1.0 - 4.0 * f64::EPSILON * n as f64)).max(0.0);
                    Interval { lo: down(lo), hi }
                } else {
                    let a = self.lo.powi(n as i32);
                    let b = self.hi.powi(n as i32);
                    let slack = 4.0 * f64::EPSILON * n as f64;
                    Interval {
                        lo: down(a - a.abs() * slack),
                        hi: up(b + b.abs() * slack),
                    }
                }
            }
        }
    }

    pub fn scale(self, c: f64) -> Interval {
        Interval::point(c) * self
    }

    /// Split at the midpoint.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval { lo: self.lo, hi: m }, Interval { lo: m, hi: self.hi })
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval { lo: down(self.lo + o.lo), hi: up(self.hi + o.hi) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval { lo: down(self.lo - o.hi), hi: up(self.hi - o.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in p {
            // 0 * inf shows up only for unbounded operands, which we never build.
            let v = if v.is_nan() { 0.0 } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Interval { lo: down(lo), hi: up(hi) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_encloses() {
        let a = Interval::new(-1.0, 2.0);
        let b = Interval::new(3.0, 4.0);
        let s = a + b;
        assert!(s.lo <= 2.0 && s.hi >= 6.0);
        let p = a * b;
        assert!(p.lo <= -4.0 && p.hi >= 8.0);
        let d = a - b;
        assert!(d.lo <= -5.0 && d.hi >= -1.0);
    }

    #[test]
    fn even_power_of_straddling_interval_starts_at_zero() {
        let a = Interval::new(-2.0, 1.0).powi(2);
        assert!(a.lo <= 0.0 && a.lo > -1e-300);
        assert!(a.hi >= 4.0);
        let b = Interval::new(2.0, 3.0).powi(3);
        assert!(b.lo <= 8.0 && b.hi >= 27.0);
    }

    #[test]
    fn intersection_and_interior() {
        let a = Interval::new(0.0, 1.0);
        assert!(Interval::new(0.25, 0.5).interior_of(&a));
        assert!(!Interval::new(0.0, 0.5).interior_of(&a));
        assert!(a.intersect(&Interval::new(2.0, 3.0)).is_none());
    }
}
