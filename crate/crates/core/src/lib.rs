//! Homothetic polygon approximations of DER flexibility domains.
//!
//! A flexibility domain is a union of basic semialgebraic sets in the
//! active/reactive power plane. Each domain is bracketed between an inner and
//! an outer homothet of a shared convex polygon prototype; the outer one is
//! found by a sum-of-squares program, the inner one by bisection on an SOS
//! feasibility check plus a translation heuristic. Homothets of one prototype
//! add parameter-wise under Minkowski summation, which makes fleet
//! aggregation a sum of scalars and vectors.
//!
//! The [`oracle`] module recomputes the same quantities by brute-force
//! geometry and is used to validate the optimization path.

extern crate openblas_src;

pub mod aggregate;
pub mod domain;
mod error;
pub mod exec;
pub mod fit;
pub mod oracle;
pub mod polynomial;
pub mod prototype;
pub mod soscompile;

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use exec::Execution;

/// A point in the power plane: `p` active power (kW), `q` reactive power
/// (kvar). Positive values are consumption, negative values generation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub p: f64,
    pub q: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { p: 0.0, q: 0.0 };

    pub const fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.p * other.p + self.q * other.q
    }

    pub fn norm(self) -> f64 {
        self.p.hypot(self.q)
    }

    pub fn norm1(self) -> f64 {
        self.p.abs() + self.q.abs()
    }

    pub fn is_finite(self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(x: Point) -> Self {
        [x.p, x.q]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.p + o.p, self.q + o.q)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.p - o.p, self.q - o.q)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.p * k, self.q * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.p, -self.q)
    }
}
