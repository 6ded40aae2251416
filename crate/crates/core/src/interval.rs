//! Closed real intervals and 2D interval vectors.
//!
//! Rounding is outward on every bound. Rather than switching the FPU rounding
//! mode, each operation computes the round-to-nearest result together with its
//! exact error term (TwoSum for addition, a fused multiply-add for products).
//! A bound is moved one ulp outward only when the error term shows that the
//! nearest result lies on the wrong side of the exact value, so exact
//! operations stay tight (`[1,2] + [3,4]` is exactly `[4,6]`).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Below this magnitude the FMA error term of a product may itself be
/// rounded, so products are widened unconditionally.
const TINY: f64 = 1e-290;

fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() { f64::NEG_INFINITY } else { s };
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err < 0.0 {
        s.next_down()
    } else {
        s
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s.is_nan() { f64::INFINITY } else { s };
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err > 0.0 {
        s.next_up()
    } else {
        s
    }
}

fn mul_near(a: f64, b: f64) -> f64 {
    // 0 * inf only arises from unbounded intervals; the product of the sets
    // it stands for contains 0.
    let p = a * b;
    if p.is_nan() {
        0.0
    } else {
        p
    }
}

fn mul_down(a: f64, b: f64) -> f64 {
    let p = mul_near(a, b);
    if !p.is_finite() || p == 0.0 && (a == 0.0 || b == 0.0) {
        return p;
    }
    if p.abs() < TINY {
        return p.next_down();
    }
    let err = a.mul_add(b, -p);
    if err < 0.0 {
        p.next_down()
    } else {
        p
    }
}

fn mul_up(a: f64, b: f64) -> f64 {
    let p = mul_near(a, b);
    if !p.is_finite() || p == 0.0 && (a == 0.0 || b == 0.0) {
        return p;
    }
    if p.abs() < TINY {
        return p.next_up();
    }
    let err = a.mul_add(b, -p);
    if err > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// A closed interval `[lo, hi]`, possibly empty.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const EMPTY: Interval = Interval {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };

    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    /// Builds `[lo, hi]`. Returns the empty interval when `lo > hi` or
    /// either bound is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        if lo <= hi {
            Interval { lo, hi }
        } else {
            Interval::EMPTY
        }
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    /// Smallest interval containing both numbers, in any order.
    pub fn spanning(a: f64, b: f64) -> Self {
        Interval::new(a.min(b), a.max(b))
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// True when every element is strictly positive.
    pub fn is_positive(&self) -> bool {
        !self.is_empty() && self.lo > 0.0
    }

    /// True when every element is strictly negative.
    pub fn is_negative(&self) -> bool {
        !self.is_empty() && self.hi < 0.0
    }

    /// The empty interval is a subset of everything.
    pub fn is_subset(&self, other: &Interval) -> bool {
        self.is_empty() || (!other.is_empty() && other.lo <= self.lo && self.hi <= other.hi)
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        !self.intersect(other).is_empty()
    }

    /// Upper bound on `hi - lo`; zero for empty intervals.
    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            add_up(self.hi, -self.lo)
        }
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Largest absolute value of an element.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Splits at the midpoint. Both halves share the midpoint bit-exactly.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval::new(self.lo, m), Interval::new(m, self.hi))
    }

    /// `[-|r|, |r|]`.
    pub fn symmetric(radius: f64) -> Interval {
        let r = radius.abs();
        Interval::new(-r, r)
    }

    /// Widens by `r` on both sides, rounding outward.
    pub fn inflate(&self, r: f64) -> Interval {
        *self + Interval::symmetric(r)
    }

    pub fn scale(&self, k: f64) -> Interval {
        *self * Interval::point(k)
    }
}

impl Default for Interval {
    fn default() -> Self {
        Interval::EMPTY
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "[empty]")
        } else {
            write!(f, "[{:?}, {:?}]", self.lo, self.hi)
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<Interval> for [f64; 2] {
    fn from(x: Interval) -> Self {
        [x.lo, x.hi]
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = String;

    fn try_from(b: [f64; 2]) -> Result<Self, Self::Error> {
        if b[0] <= b[1] {
            Ok(Interval { lo: b[0], hi: b[1] })
        } else {
            Err(format!("invalid interval bounds [{}, {}]", b[0], b[1]))
        }
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;

    fn sub(self, rhs: Interval) -> Interval {
        self + (-rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;

    fn neg(self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;

    fn mul(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        let pairs = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in pairs {
            lo = lo.min(mul_down(a, b));
            hi = hi.max(mul_up(a, b));
        }
        Interval { lo, hi }
    }
}

/// Determinant of a 2x2 interval matrix `[[a11, a12], [a21, a22]]`.
pub fn det2(a11: Interval, a12: Interval, a21: Interval, a22: Interval) -> Interval {
    a11 * a22 - a12 * a21
}

/// Cartesian product of two intervals. Empty iff either component is empty.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Box2 {
    pub x: Interval,
    pub y: Interval,
}

impl Box2 {
    pub const EMPTY: Box2 = Box2 {
        x: Interval::EMPTY,
        y: Interval::EMPTY,
    };

    pub fn new(x: Interval, y: Interval) -> Self {
        Box2 { x, y }
    }

    pub fn point(x: f64, y: f64) -> Self {
        Box2::new(Interval::point(x), Interval::point(y))
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty() || self.y.is_empty()
    }

    /// True iff the origin belongs to the box.
    pub fn contains_zero(&self) -> bool {
        !self.is_empty() && self.x.contains_zero() && self.y.contains_zero()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x.contains(x) && self.y.contains(y)
    }

    pub fn is_subset(&self, other: &Box2) -> bool {
        self.is_empty() || (self.x.is_subset(&other.x) && self.y.is_subset(&other.y))
    }

    pub fn hull(&self, other: &Box2) -> Box2 {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Box2::new(self.x.hull(&other.x), self.y.hull(&other.y))
    }

    pub fn intersect(&self, other: &Box2) -> Box2 {
        Box2::new(self.x.intersect(&other.x), self.y.intersect(&other.y))
    }

    pub fn max_width(&self) -> f64 {
        self.x.width().max(self.y.width())
    }
}

impl fmt::Debug for Box2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} x {:?})", self.x, self.y)
    }
}

impl Add for Box2 {
    type Output = Box2;

    fn add(self, rhs: Box2) -> Box2 {
        Box2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Box2 {
    type Output = Box2;

    fn sub(self, rhs: Box2) -> Box2 {
        Box2::new(self.x - rhs.x, self.y - rhs.y)
    }
}
