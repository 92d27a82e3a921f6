//! Convex polygon prototypes and their homothets.
//!
//! A prototype is stored in halfspace form `A x <= b` with unit-norm rows
//! sorted counter-clockwise by normal angle. Vertex `i` is the intersection of
//! edges `i` and `i + 1 (mod n)`. A homothet `H[α, β]` is the image
//! `α·F⁰ + β`, whose halfspace form is `A x <= α b + A β`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

const VERTEX_TOL: f64 = 1e-9;

/// A closed halfplane `normal · x <= offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfplane {
    pub normal: Point,
    pub offset: f64,
}

impl Halfplane {
    pub fn new(normal: Point, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// Signed slack `offset − normal·x`; non-negative inside.
    pub fn slack(&self, x: Point) -> f64 {
        self.offset - self.normal.dot(x)
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        self.slack(x) >= -tol
    }
}

/// Intersection of the boundary lines of two halfplanes, if not parallel.
pub fn line_intersection(a: &Halfplane, b: &Halfplane) -> Option<Point> {
    let det = a.normal.p * b.normal.q - a.normal.q * b.normal.p;
    if det.abs() < 1e-14 {
        return None;
    }
    let p = (a.offset * b.normal.q - a.normal.q * b.offset) / det;
    let q = (a.normal.p * b.offset - a.offset * b.normal.p) / det;
    Some(Point::new(p, q))
}

/// Clips a convex polygon (vertex loop) by a halfplane.
pub fn clip_polygon(poly: &[Point], h: &Halfplane) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for (i, &cur) in poly.iter().enumerate() {
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (sc, sp) = (h.slack(cur), h.slack(prev));
        if sc >= 0.0 {
            if sp < 0.0 {
                out.push(prev.lerp(cur, sp / (sp - sc)));
            }
            out.push(cur);
        } else if sp >= 0.0 {
            out.push(prev.lerp(cur, sp / (sp - sc)));
        }
    }
    out
}

/// Shoelace area of a vertex loop (positive for counter-clockwise).
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.p * b.q - b.p * a.q
        })
        .sum::<f64>()
        / 2.0
}

/// Serializable description of a prototype.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PrototypeSpec {
    Regular {
        n: usize,
        #[serde(default)]
        rotation: f64,
    },
    Custom {
        #[serde(rename = "A")]
        a: Vec<[f64; 2]>,
        b: Vec<f64>,
    },
}

impl PrototypeSpec {
    pub fn build(&self) -> Result<PrototypePolygon> {
        match *self {
            PrototypeSpec::Regular { n, rotation } => regular_prototype(n, rotation),
            PrototypeSpec::Custom { ref a, ref b } => PrototypePolygon::from_halfspaces(a, b),
        }
    }
}

/// Convex polygon `{x | A x <= b}` containing the origin in its interior.
#[derive(Clone, Debug, Serialize)]
#[serde(into = "PrototypeSpec")]
pub struct PrototypePolygon {
    edges: Vec<Halfplane>,
    vertices: Vec<Point>,
    spec: PrototypeSpec,
}

impl From<PrototypePolygon> for PrototypeSpec {
    fn from(p: PrototypePolygon) -> Self {
        p.spec
    }
}

impl<'de> Deserialize<'de> for PrototypePolygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PrototypeSpec::deserialize(d)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}

/// Regular `n`-gon with unit apothem; edge `i` has outward normal at angle
/// `rotation + 2πi/n`.
pub fn regular_prototype(n_edges: usize, rotation: f64) -> Result<PrototypePolygon> {
    if n_edges < 3 {
        return Err(Error::InvalidPrototype(format!(
            "a polygon needs at least 3 edges, got {n_edges}"
        )));
    }
    if !rotation.is_finite() {
        return Err(Error::InvalidPrototype("rotation must be finite".into()));
    }
    let n = n_edges as f64;
    let edges: Vec<Halfplane> = (0..n_edges)
        .map(|i| {
            let t = rotation + 2.0 * PI * i as f64 / n;
            Halfplane::new(Point::new(t.cos(), t.sin()), 1.0)
        })
        .collect();
    let radius = 1.0 / (PI / n).cos();
    let vertices = (0..n_edges)
        .map(|i| {
            let t = rotation + (2.0 * i as f64 + 1.0) * PI / n;
            Point::new(radius * t.cos(), radius * t.sin())
        })
        .collect();
    Ok(PrototypePolygon {
        edges,
        vertices,
        spec: PrototypeSpec::Regular {
            n: n_edges,
            rotation,
        },
    })
}

impl PrototypePolygon {
    /// Builds a prototype from raw rows. Rows are normalized to unit length
    /// and reordered counter-clockwise by normal angle.
    pub fn from_halfspaces(a: &[[f64; 2]], b: &[f64]) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidPrototype(m));
        if a.len() != b.len() {
            return bad(format!("A has {} rows but b has {}", a.len(), b.len()));
        }
        if a.len() < 3 {
            return bad("a bounded polygon needs at least 3 halfspaces".into());
        }
        let mut edges = Vec::with_capacity(a.len());
        for (row, &off) in a.iter().zip(b) {
            let nrm = Point::from(*row);
            let len = nrm.norm();
            if !(len > 0.0 && len.is_finite() && off.is_finite()) {
                return bad(format!("degenerate row {row:?}"));
            }
            if off <= 0.0 {
                return bad(format!("offset {off} ≤ 0: the origin must be interior"));
            }
            edges.push(Halfplane::new(nrm * (1.0 / len), off / len));
        }
        let angle = |h: &Halfplane| h.normal.q.atan2(h.normal.p).rem_euclid(2.0 * PI);
        edges.sort_by(|x, y| angle(x).total_cmp(&angle(y)));
        let n = edges.len();
        for i in 0..n {
            let (t0, t1) = (
                edges[i].normal.q.atan2(edges[i].normal.p),
                edges[(i + 1) % n]
                    .normal
                    .q
                    .atan2(edges[(i + 1) % n].normal.p),
            );
            let gap = (t1 - t0).rem_euclid(2.0 * PI);
            if gap < 1e-12 {
                return bad("parallel duplicate rows".into());
            }
            if gap >= PI - 1e-12 {
                return bad("halfspaces do not bound a polygon".into());
            }
        }
        let vertices: Vec<Point> = (0..n)
            .map(|i| line_intersection(&edges[i], &edges[(i + 1) % n]).expect("non-parallel"))
            .collect();
        for (i, v) in vertices.iter().enumerate() {
            if let Some(j) = edges.iter().position(|e| e.slack(*v) < -VERTEX_TOL) {
                return bad(format!(
                    "row {j} is violated at vertex {i}: a row is redundant"
                ));
            }
        }
        let proto = PrototypePolygon {
            edges,
            vertices,
            spec: PrototypeSpec::Custom {
                a: a.to_vec(),
                b: b.to_vec(),
            },
        };
        if proto.area() <= 0.0 {
            return bad("polygon has empty interior".into());
        }
        Ok(proto)
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Halfplane] {
        &self.edges
    }

    pub fn normal(&self, i: usize) -> Point {
        self.edges[i].normal
    }

    pub fn offset(&self, i: usize) -> f64 {
        self.edges[i].offset
    }

    /// Counter-clockwise vertex loop.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn spec(&self) -> &PrototypeSpec {
        &self.spec
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    /// Structural equality of the halfspace data within `tol`.
    pub fn same_shape(&self, other: &PrototypePolygon, tol: f64) -> bool {
        self.edges.len() == other.edges.len()
            && self.edges.iter().zip(&other.edges).all(|(x, y)| {
                (x.normal - y.normal).norm1() <= tol && (x.offset - y.offset).abs() <= tol
            })
    }

    /// Endpoints of edge `i` (vertex `i − 1` to vertex `i`).
    pub fn edge_segment(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[(i + n - 1) % n], self.vertices[i])
    }
}

/// `H[α, β; F⁰] = α F⁰ + β`.
#[derive(Clone, Debug)]
pub struct Homothet {
    pub proto: Arc<PrototypePolygon>,
    pub alpha: f64,
    pub beta: Point,
}

impl Homothet {
    pub fn new(proto: Arc<PrototypePolygon>, alpha: f64, beta: Point) -> Self {
        Self { proto, alpha, beta }
    }

    pub fn shares_prototype(&self, other: &Homothet) -> bool {
        Arc::ptr_eq(&self.proto, &other.proto) || self.proto.same_shape(&other.proto, 1e-12)
    }

    /// Right-hand sides `α b_i + a_i·β`.
    pub fn rhs(&self) -> Vec<f64> {
        self.proto
            .edges()
            .iter()
            .map(|e| self.alpha * e.offset + e.normal.dot(self.beta))
            .collect()
    }

    /// Halfspace form `(A, rhs)` of the homothet.
    pub fn halfspaces(&self) -> Vec<Halfplane> {
        self.proto
            .edges()
            .iter()
            .zip(self.rhs())
            .map(|(e, r)| Halfplane::new(e.normal, r))
            .collect()
    }

    /// Prototype vertices mapped through `v ↦ α v + β`, order preserved.
    pub fn vertices(&self) -> Vec<Point> {
        self.proto
            .vertices()
            .iter()
            .map(|&v| v * self.alpha + self.beta)
            .collect()
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        self.halfspaces().iter().all(|h| h.contains(x, tol))
    }

    pub fn area(&self) -> f64 {
        self.alpha * self.alpha * self.proto.area()
    }

    /// Maps a prototype point `u` to `α u + β`.
    pub fn map(&self, u: Point) -> Point {
        u * self.alpha + self.beta
    }
}

/// `homothet_halfspaces`: `(A, rhs)` with `rhs_i = α b_i + a_i·β`.
pub fn homothet_halfspaces(h: &Homothet) -> (Vec<Point>, Vec<f64>) {
    (h.proto.edges().iter().map(|e| e.normal).collect(), h.rhs())
}

#[derive(Serialize, Deserialize)]
struct HomothetRepr {
    alpha: f64,
    beta: Point,
    prototype: PrototypeSpec,
}

impl Serialize for Homothet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HomothetRepr {
            alpha: self.alpha,
            beta: self.beta,
            prototype: self.proto.spec().clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Homothet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = HomothetRepr::deserialize(d)?;
        let proto = r.prototype.build().map_err(serde::de::Error::custom)?;
        Ok(Homothet::new(Arc::new(proto), r.alpha, r.beta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square() -> Arc<PrototypePolygon> {
        Arc::new(regular_prototype(4, 0.0).unwrap())
    }

    fn close(a: Point, b: Point) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn unit_square_matches_halfspace_example() {
        let sq = square();
        let rows: Vec<[i32; 2]> = sq
            .edges()
            .iter()
            .map(|e| [e.normal.p.round() as i32, e.normal.q.round() as i32])
            .collect();
        let mut sorted = rows.clone();
        sorted.sort();
        assert_eq!(sorted, vec![[-1, 0], [0, -1], [0, 1], [1, 0]]);
        assert!(sq.edges().iter().all(|e| (e.offset - 1.0).abs() < 1e-15));
        let from_rows = PrototypePolygon::from_halfspaces(
            &[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
            &[1.0; 4],
        )
        .unwrap();
        assert!(sq.same_shape(&from_rows, 1e-12));
    }

    #[test]
    fn circumradii() {
        let hex = regular_prototype(6, 0.0).unwrap();
        for v in hex.vertices() {
            assert!((v.norm() - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        }
        let tri = regular_prototype(3, 0.0).unwrap();
        assert_eq!(tri.vertices().len(), 3);
        for v in tri.vertices() {
            assert!((v.norm() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn halfspace_rhs() {
        let h = Homothet::new(square(), 1.0, Point::ORIGIN);
        assert_eq!(h.rhs(), vec![1.0; 4]);
        let h = Homothet::new(square(), 2.0, Point::new(1.0, 0.0));
        // normals (1,0), (0,1), (-1,0), (0,-1)
        let (a, rhs) = homothet_halfspaces(&h);
        for (n, r) in a.iter().zip(&rhs) {
            let expect = if n.p > 0.5 {
                3.0
            } else if n.p < -0.5 {
                1.0
            } else {
                2.0
            };
            assert!((r - expect).abs() < 1e-12);
        }
        let hex = Arc::new(regular_prototype(6, 0.3).unwrap());
        let h = Homothet::new(hex.clone(), 1.0, Point::ORIGIN);
        for (e, r) in hex.edges().iter().zip(h.rhs()) {
            assert_eq!(e.offset, r);
        }
    }

    #[test]
    fn vertex_images() {
        let h = Homothet::new(square(), 1.0, Point::ORIGIN);
        let vs = h.vertices();
        for v in &vs {
            assert!(close(
                Point::new(v.p.abs(), v.q.abs()),
                Point::new(1.0, 1.0)
            ));
        }
        let h = Homothet::new(square(), 0.5, Point::new(2.0, 3.0));
        let expect = [(2.5, 3.5), (1.5, 3.5), (1.5, 2.5), (2.5, 2.5)];
        for (v, e) in h.vertices().iter().zip(expect) {
            assert!(close(*v, Point::new(e.0, e.1)), "{v:?} vs {e:?}");
        }
        let hex = Homothet::new(
            Arc::new(regular_prototype(6, 0.0).unwrap()),
            2.0,
            Point::ORIGIN,
        );
        for v in hex.vertices() {
            assert!((v.norm() - 4.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn containment() {
        let id = Homothet::new(square(), 1.0, Point::ORIGIN);
        assert!(id.contains(Point::ORIGIN, 0.0));
        assert!(!id.contains(Point::new(1.0 + 1e-3, 0.0), 0.0));
        let h = Homothet::new(square(), 2.0, Point::new(1.0, 0.0));
        assert!(h.contains(Point::new(3.0, 2.0), 1e-12));
    }

    #[test]
    fn rejects_bad_prototypes() {
        assert!(regular_prototype(2, 0.0).is_err());
        // origin on boundary
        assert!(PrototypePolygon::from_halfspaces(
            &[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
            &[1.0, 0.0, 1.0, 1.0]
        )
        .is_err());
        // unbounded
        assert!(PrototypePolygon::from_halfspaces(
            &[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            &[1.0, 1.0, 1.0]
        )
        .is_err());
        // redundant row
        assert!(PrototypePolygon::from_halfspaces(
            &[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]],
            &[1.0, 1.0, 1.0, 1.0, 5.0]
        )
        .is_err());
    }

    #[test]
    fn json_shapes() {
        let spec: PrototypeSpec =
            serde_json::from_str(r#"{"kind":"regular","n":6,"rotation":0.0}"#).unwrap();
        assert_eq!(
            spec,
            PrototypeSpec::Regular {
                n: 6,
                rotation: 0.0
            }
        );
        let custom: PrototypePolygon = serde_json::from_str(
            r#"{"kind":"custom","A":[[1,0],[-1,0],[0,1],[0,-1]],"b":[1,1,1,1]}"#,
        )
        .unwrap();
        assert_eq!(custom.n_edges(), 4);
        let h = Homothet::new(square(), 0.5, Point::new(1.0, -2.0));
        let v = serde_json::to_value(&h).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"alpha":0.5,"beta":[1.0,-2.0],"prototype":{"kind":"regular","n":4,"rotation":0.0}})
        );
        let back: Homothet = serde_json::from_value(v).unwrap();
        assert!(back.shares_prototype(&h));
    }

    #[test]
    fn clipping() {
        let sq = square();
        let half = clip_polygon(sq.vertices(), &Halfplane::new(Point::new(1.0, 0.0), 0.0));
        assert!((polygon_area(&half) - 2.0).abs() < 1e-12);
        let none = clip_polygon(sq.vertices(), &Halfplane::new(Point::new(1.0, 0.0), -2.0));
        assert!(none.is_empty());
    }

    proptest! {
        #[test]
        fn regular_area_formula(n in 3usize..24, rot in -3.2f64..3.2) {
            let proto = regular_prototype(n, rot).unwrap();
            let expect = n as f64 * (PI / n as f64).tan();
            prop_assert!((proto.area() - expect).abs() < 1e-9);
        }

        #[test]
        fn vertex_halfspace_duality(n in 3usize..12, rot in -3.2f64..3.2, alpha in 0.01f64..10.0,
                                    bp in -5.0f64..5.0, bq in -5.0f64..5.0) {
            let h = Homothet::new(Arc::new(regular_prototype(n, rot).unwrap()), alpha, Point::new(bp, bq));
            let hs = h.halfspaces();
            for v in h.vertices() {
                let scale = 1.0 + alpha + bp.abs() + bq.abs();
                let tight = hs.iter().filter(|e| e.slack(v).abs() <= 1e-9 * scale).count();
                prop_assert_eq!(tight, 2);
                prop_assert!(hs.iter().all(|e| e.slack(v) >= -1e-9 * scale));
            }
        }

        #[test]
        fn homothet_composition(n in 3usize..9, a1 in 0.1f64..3.0, a2 in 0.1f64..3.0,
                                b1 in (-2.0f64..2.0, -2.0f64..2.0), b2 in (-2.0f64..2.0, -2.0f64..2.0)) {
            let proto = Arc::new(regular_prototype(n, 0.2).unwrap());
            let inner = Homothet::new(proto.clone(), a2, Point::new(b2.0, b2.1));
            let (a_rows, rhs) = homothet_halfspaces(&inner);
            let rows: Vec<[f64; 2]> = a_rows.iter().map(|&x| x.into()).collect();
            // re-centre so the composed prototype contains the origin
            let shifted: Vec<f64> = rhs.iter().zip(&a_rows).map(|(r, a)| r - a.dot(inner.beta)).collect();
            let as_proto = Arc::new(PrototypePolygon::from_halfspaces(&rows, &shifted).unwrap());
            let outer = Homothet::new(as_proto, a1, Point::new(b1.0, b1.1) + inner.beta * a1);
            let direct = Homothet::new(proto, a1 * a2, inner.beta * a1 + Point::new(b1.0, b1.1));
            for v in outer.vertices() {
                prop_assert!(direct.contains(v, 1e-9));
                let tight = direct.halfspaces().iter().filter(|e| e.slack(v).abs() < 1e-9).count();
                prop_assert_eq!(tight, 2);
            }
        }
    }
}
