//! Brute-force geometry used to validate the optimization path.
//!
//! Nothing here touches the conic solver. Supports are either closed-form
//! (for the built-in DER families, each piece is a box intersected with an
//! axis-aligned ellipse, or a point) or estimated from ray-marched boundary
//! samples. The outer LP is solved by enumerating vertices, the inner fit by
//! grid search with sampled containment, and Minkowski sums by sampling.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::{march, DerSpec, FlexDomain};
use crate::exec::chunks;
use crate::prototype::{Homothet, PrototypePolygon};
use crate::{Execution, Point, Result};

pub const DEFAULT_SEED: u64 = 0x0ac1_e5ee;
const SAMPLE_CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportEstimate {
    pub direction: Point,
    pub value: f64,
    pub argmax: Point,
}

/// `{p_lo <= p <= p_hi, q_lo <= q <= q_hi, c·p² + q² <= r²}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxEllipse {
    pub p_lo: f64,
    pub p_hi: f64,
    pub q_lo: f64,
    pub q_hi: f64,
    /// `(c, r)`; `None` for a plain box.
    pub ellipse: Option<(f64, f64)>,
}

impl BoxEllipse {
    fn in_box(&self, x: Point, tol: f64) -> bool {
        x.p >= self.p_lo - tol
            && x.p <= self.p_hi + tol
            && x.q >= self.q_lo - tol
            && x.q <= self.q_hi + tol
    }

    fn in_ellipse(&self, x: Point, tol: f64) -> bool {
        match self.ellipse {
            None => true,
            Some((c, r)) => c * x.p * x.p + x.q * x.q <= r * r + tol,
        }
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        self.in_box(x, tol) && self.in_ellipse(x, tol)
    }

    /// Exact support: the maximizer is the ellipse's own support point, a
    /// box corner, or a box edge meeting the ellipse.
    pub fn support(&self, a: Point) -> (f64, Point) {
        let mut cands = vec![
            Point::new(self.p_lo, self.q_lo),
            Point::new(self.p_hi, self.q_lo),
            Point::new(self.p_lo, self.q_hi),
            Point::new(self.p_hi, self.q_hi),
        ];
        if let Some((c, r)) = self.ellipse {
            let k = (a.p * a.p / c + a.q * a.q).sqrt() / r;
            if k > 0.0 {
                cands.push(Point::new(a.p / (c * k), a.q / k));
            }
            for p in [self.p_lo, self.p_hi] {
                let s = r * r - c * p * p;
                if s >= 0.0 {
                    cands.push(Point::new(p, s.sqrt()));
                    cands.push(Point::new(p, -s.sqrt()));
                }
            }
            for q in [self.q_lo, self.q_hi] {
                let s = (r * r - q * q) / c;
                if s >= 0.0 {
                    cands.push(Point::new(s.sqrt(), q));
                    cands.push(Point::new(-s.sqrt(), q));
                }
            }
        }
        cands
            .into_iter()
            .filter(|&x| self.contains(x, 1e-9))
            .map(|x| (a.dot(x), x))
            .max_by(|x, y| x.0.total_cmp(&y.0))
            .expect("nonempty region has a feasible candidate")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticPiece {
    Region(BoxEllipse),
    Point(Point),
}

impl AnalyticPiece {
    pub fn support(&self, a: Point) -> (f64, Point) {
        match self {
            AnalyticPiece::Region(r) => r.support(a),
            AnalyticPiece::Point(x) => (a.dot(*x), *x),
        }
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        match self {
            AnalyticPiece::Region(r) => r.contains(x, tol),
            AnalyticPiece::Point(c) => (x - *c).norm() <= tol,
        }
    }
}

/// Closed-form description of the built-in DER families, derived from the
/// parameters alone. `None` for custom domains.
pub fn analytic_pieces(spec: &DerSpec) -> Option<Vec<AnalyticPiece>> {
    use AnalyticPiece::*;
    match *spec {
        DerSpec::Battery { p_max, s } => Some(vec![Region(BoxEllipse {
            p_lo: -p_max,
            p_hi: p_max,
            q_lo: -s,
            q_hi: s,
            ellipse: Some((1.0, s)),
        })]),
        DerSpec::Pv { p_max, s } => Some(vec![Region(BoxEllipse {
            p_lo: -p_max,
            p_hi: 0.0,
            q_lo: -s,
            q_hi: s,
            ellipse: Some((1.0, s)),
        })]),
        DerSpec::Wind {
            p_max,
            p0,
            q0,
            s1,
            s2,
            rotor_coupling: c,
        } => Some(vec![
            Region(BoxEllipse {
                p_lo: -p0,
                p_hi: 0.0,
                q_lo: -q0,
                q_hi: q0,
                ellipse: None,
            }),
            Region(BoxEllipse {
                p_lo: -p_max,
                p_hi: -p0,
                q_lo: 0.0,
                q_hi: s2,
                ellipse: Some((c, s2)),
            }),
            Region(BoxEllipse {
                p_lo: -p_max,
                p_hi: -p0,
                q_lo: -s1,
                q_hi: 0.0,
                ellipse: Some((c, s1)),
            }),
        ]),
        DerSpec::Ac { p_max, gamma } => Some(vec![
            Point(crate::Point::ORIGIN),
            Point(crate::Point::new(p_max, gamma * p_max)),
        ]),
        DerSpec::Custom { .. } => None,
    }
}

/// Closed-form support of a whole domain (max over pieces), if available.
/// For a single-piece view of a multi-piece domain only that piece counts.
pub fn analytic_support(d: &FlexDomain, a: Point) -> Option<(f64, Point)> {
    let pieces = analytic_pieces(d.spec())?;
    let chosen: Vec<AnalyticPiece> = match d.piece_of() {
        Some(k) => vec![*pieces.get(k)?],
        None => pieces,
    };
    chosen
        .iter()
        .map(|p| p.support(a))
        .max_by(|x, y| x.0.total_cmp(&y.0))
}

/// Support value of `d` in direction `a` from `n` boundary samples with a
/// golden-section refinement around the best ray.
///
/// Rays for a piece are at angles `2πj/m`, so sample sets for `n` and a
/// multiple of `n` are nested.
pub fn support_estimate(d: &FlexDomain, a: Point, n: usize) -> SupportEstimate {
    let norm = a.norm();
    let a = if norm > 0.0 {
        a * (1.0 / norm)
    } else {
        Point::new(1.0, 0.0)
    };
    let mut best = (f64::NEG_INFINITY, Point::ORIGIN);
    if d.is_discrete() || d.pieces().iter().any(|p| p.as_point().is_some()) {
        for (piece, &x) in d.pieces().iter().zip(d.anchors()) {
            if piece.as_point().is_some() && a.dot(x) > best.0 {
                best = (a.dot(x), x);
            }
        }
    }
    let continuous: Vec<usize> = (0..d.pieces().len())
        .filter(|&k| d.pieces()[k].as_point().is_none())
        .collect();
    if continuous.is_empty() {
        return SupportEstimate {
            direction: a,
            value: best.0,
            argmax: best.1,
        };
    }
    let m = n.div_ceil(continuous.len()).max(8);
    let reach = 2.0 * d.bounding_box().diagonal();
    let step = 2.0 * std::f64::consts::PI / m as f64;
    for &k in &continuous {
        let piece = &d.pieces()[k];
        let anchor = d.anchors()[k];
        let ray = |t: f64| march(piece, anchor, Point::new(t.cos(), t.sin()), reach);
        let mut local = (f64::NEG_INFINITY, Point::ORIGIN, 0.0);
        for j in 0..m {
            let t = step * j as f64;
            let x = ray(t);
            if a.dot(x) > local.0 {
                local = (a.dot(x), x, t);
            }
        }
        // Golden-section search on the angle within one step of the best ray.
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (local.2 - step, local.2 + step);
        for _ in 0..60 {
            let (t1, t2) = (hi - g * (hi - lo), lo + g * (hi - lo));
            if a.dot(ray(t1)) < a.dot(ray(t2)) {
                lo = t1;
            } else {
                hi = t2;
            }
        }
        let x = ray(0.5 * (lo + hi));
        if a.dot(x) > local.0 {
            local = (a.dot(x), x, 0.0);
        }
        if local.0 > best.0 {
            best = (local.0, local.1);
        }
    }
    SupportEstimate {
        direction: a,
        value: best.0,
        argmax: best.1,
    }
}

/// Support used by the LP oracle: closed form when available, otherwise
/// sampled with `10⁵` rays.
pub fn support_value(d: &FlexDomain, a: Point) -> f64 {
    match analytic_support(d, a) {
        Some((v, _)) => v,
        None => support_estimate(d, a, 100_000).value,
    }
}

fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][c] = r[row];
        }
        *o = det(mc) / d;
    }
    Some(out)
}

/// Least `‖β‖₁` over `{β | aᵢ·β >= cᵢ}`: the optimum is a vertex of the
/// region, a crossing of a constraint line with an axis, or the origin.
fn least_l1(normals: &[Point], c: &[f64], tol: f64) -> Option<Point> {
    let feasible = |x: Point| normals.iter().zip(c).all(|(a, &ci)| a.dot(x) >= ci - tol);
    let mut cands = vec![Point::ORIGIN];
    let n = normals.len();
    for i in 0..n {
        let a = normals[i];
        if a.p.abs() > 1e-12 {
            cands.push(Point::new(c[i] / a.p, 0.0));
        }
        if a.q.abs() > 1e-12 {
            cands.push(Point::new(0.0, c[i] / a.q));
        }
        for j in i + 1..n {
            let b = normals[j];
            let det = a.p * b.q - a.q * b.p;
            if det.abs() > 1e-12 {
                cands.push(Point::new(
                    (c[i] * b.q - a.q * c[j]) / det,
                    (a.p * c[j] - c[i] * b.p) / det,
                ));
            }
        }
    }
    cands.into_iter().filter(|&x| feasible(x)).min_by(|x, y| {
        x.norm1()
            .total_cmp(&y.norm1())
            .then(x.p.total_cmp(&y.p))
            .then(x.q.total_cmp(&y.q))
    })
}

/// `min α` subject to `α bᵢ + aᵢ·β >= h(aᵢ)` for every prototype edge, by
/// vertex enumeration, with the least-`‖β‖₁` tie-break.
pub fn outer_fit_lp(d: &FlexDomain, proto: &Arc<PrototypePolygon>) -> Result<Homothet> {
    let edges = proto.edges();
    let h: Vec<f64> = edges.iter().map(|e| support_value(d, e.normal)).collect();
    let n = edges.len();
    let scale = 1.0 + h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    let feasible = |x: [f64; 3]| {
        edges
            .iter()
            .zip(&h)
            .all(|(e, &hi)| x[0] * e.offset + e.normal.p * x[1] + e.normal.q * x[2] >= hi - tol)
    };
    let mut alpha = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let rows =
                    [i, j, k].map(|r| [edges[r].offset, edges[r].normal.p, edges[r].normal.q]);
                if let Some(x) = solve3(rows, [h[i], h[j], h[k]]) {
                    if feasible(x) && x[0] < alpha {
                        alpha = x[0];
                    }
                }
            }
        }
    }
    if !alpha.is_finite() {
        return Err(crate::Error::Solver("outer LP has no vertex".into()));
    }
    let cap = alpha * (1.0 + 1e-7) + 1e-12;
    let normals: Vec<Point> = edges.iter().map(|e| e.normal).collect();
    let rhs: Vec<f64> = edges
        .iter()
        .zip(&h)
        .map(|(e, &hi)| hi - cap * e.offset)
        .collect();
    let beta = least_l1(&normals, &rhs, tol)
        .ok_or_else(|| crate::Error::Solver("outer LP tie-break found no point".into()))?;
    Ok(Homothet::new(Arc::clone(proto), cap, beta))
}

/// Vertices and `per_edge` points per edge of a homothet.
pub fn homothet_boundary(h: &Homothet, per_edge: usize) -> Vec<Point> {
    let v = h.vertices();
    let n = v.len();
    let mut out = Vec::with_capacity(n * per_edge);
    for i in 0..n {
        for j in 0..per_edge {
            out.push(v[i].lerp(v[(i + 1) % n], j as f64 / per_edge as f64));
        }
    }
    out
}

fn sampled_fit(d: &FlexDomain, h: &Homothet) -> bool {
    homothet_boundary(h, 64)
        .into_iter()
        .all(|x| d.contains(x, 0.0))
}

fn best_alpha_at(
    d: &FlexDomain,
    proto: &Arc<PrototypePolygon>,
    beta: Point,
    hi: f64,
    tol: f64,
) -> f64 {
    if !d.contains(beta, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if sampled_fit(d, &Homothet::new(Arc::clone(proto), mid, beta)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Grid search over `β` in the bounding box with per-`β` bisection on `α`
/// (containment by vertex and edge sampling), then compass refinement.
pub fn inner_fit_grid(
    d: &FlexDomain,
    proto: &Arc<PrototypePolygon>,
    grid_n: usize,
    tol: f64,
    exec: Execution,
) -> Result<Homothet> {
    if d.is_discrete() {
        return Err(crate::Error::DiscreteDomain(
            "inner approximations do not exist for discrete flexibility domains",
        ));
    }
    let grid_n = grid_n.max(2);
    let b = d.bounding_box();
    let hi = 2.0 * b.half_width();
    let at = |i: usize| {
        let (u, v) = (i % grid_n, i / grid_n);
        Point::new(
            b.p_min + (b.p_max - b.p_min) * u as f64 / (grid_n - 1) as f64,
            b.q_min + (b.q_max - b.q_min) * v as f64 / (grid_n - 1) as f64,
        )
    };
    let alphas = exec.map_range(grid_n * grid_n, |i| best_alpha_at(d, proto, at(i), hi, tol));
    let (i_best, &a_best) = alphas
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
        .expect("grid is nonempty");
    let mut best = (a_best, at(i_best));
    let mut step = 0.5 * (b.p_max - b.p_min).max(b.q_max - b.q_min) / (grid_n - 1) as f64;
    while step > 0.1 * tol {
        let dirs = [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (1.0, 1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
            (-1.0, -1.0),
        ];
        let cands: Vec<Point> = dirs
            .iter()
            .map(|&(x, y)| best.1 + Point::new(x, y) * step)
            .collect();
        let vals = exec.map_slice(&cands, |_, &c| best_alpha_at(d, proto, c, hi, tol));
        match vals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
        {
            Some((k, &a)) if a > best.0 => best = (a, cands[k]),
            _ => step *= 0.5,
        }
    }
    Ok(Homothet::new(Arc::clone(proto), best.0, best.1))
}

/// One uniform member of `d`: rejection in the bounding box for continuous
/// domains, a uniformly chosen point for discrete ones.
pub fn sample_member(d: &FlexDomain, rng: &mut impl Rng) -> Point {
    if d.is_discrete() {
        let a = d.anchors();
        return a[rng.gen_range(0..a.len())];
    }
    let b = d.bounding_box();
    for _ in 0..1_000_000 {
        let x = b.sample(rng);
        if d.contains(x, 0.0) {
            return x;
        }
    }
    d.anchors()[0]
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// `n` points `Σᵢ xᵢ` with each `xᵢ` drawn from `domains[i]`. Each chunk of
/// points has its own random stream keyed by `(seed, chunk)`, so the output
/// does not depend on the execution mode.
pub fn minkowski_sample(
    domains: &[FlexDomain],
    n: usize,
    seed: u64,
    exec: Execution,
) -> Vec<Point> {
    let parts = chunks(n, SAMPLE_CHUNK);
    exec.map_slice(&parts, |c, &(_, len)| {
        let mut rng = chunk_rng(seed, c);
        (0..len)
            .map(|_| {
                domains
                    .iter()
                    .fold(Point::ORIGIN, |acc, d| acc + sample_member(d, &mut rng))
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Uniform samples inside a homothet, by rejection in its vertex box.
pub fn sample_homothet(h: &Homothet, n: usize, rng: &mut impl Rng) -> Vec<Point> {
    let v = h.vertices();
    let bbox = crate::domain::BoundingBox::around(v.iter().copied()).expect("polygon has vertices");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = bbox.sample(rng);
        if h.contains(x, 0.0) {
            out.push(x);
        }
    }
    out
}

/// Splits a point of `H[Σαᵢ, Σβᵢ]` into member points `xᵢ = αᵢ u + βᵢ`
/// with the shared prototype coordinate `u`.
pub fn decompose_point(members: &[Homothet], x: Point) -> Vec<Point> {
    let alpha: f64 = members.iter().map(|h| h.alpha).sum();
    let beta = members.iter().fold(Point::ORIGIN, |a, h| a + h.beta);
    let u = (x - beta) * (1.0 / alpha);
    members.iter().map(|h| h.map(u)).collect()
}

fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 {
        ((x - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (x - a.lerp(b, t)).norm()
}

/// Euclidean distance from `x` to a convex polygon (0 inside).
pub fn point_polygon_distance(x: Point, h: &Homothet) -> f64 {
    if h.contains(x, 0.0) {
        return 0.0;
    }
    let v = h.vertices();
    let n = v.len();
    (0..n)
        .map(|i| segment_distance(x, v[i], v[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Largest distance to `inner` over the outer vertices and `n` uniform
/// samples of `outer`.
pub fn max_gap_sampled(outer: &Homothet, inner: &Homothet, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    outer
        .vertices()
        .into_iter()
        .chain(sample_homothet(outer, n, &mut rng))
        .map(|x| point_polygon_distance(x, inner))
        .fold(0.0, f64::max)
}

/// Fraction of `n` uniform samples of `outer` that land in `inner`.
pub fn area_ratio_mc(outer: &Homothet, inner: &Homothet, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = sample_homothet(outer, n, &mut rng);
    pts.iter().filter(|&&x| inner.contains(x, 0.0)).count() as f64 / n as f64
}

/// CSV text with header `p,q`.
pub fn to_csv(points: &[Point]) -> String {
    let mut s = String::from("p,q\n");
    for x in points {
        s.push_str(&format!("{},{}\n", x.p, x.q));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_ac, make_battery, make_pv};
    use crate::prototype::regular_prototype;

    fn square() -> Arc<PrototypePolygon> {
        Arc::new(regular_prototype(4, 0.0).unwrap())
    }

    #[test]
    fn disk_support() {
        let d = make_battery(0.999, 1.0).unwrap();
        let s = support_estimate(&d, Point::new(0.0, 1.0), 1000);
        assert!((s.value - 1.0).abs() < 1e-6, "{}", s.value);
        assert!(d.contains(s.argmax, 1e-6));
        assert!((s.direction.dot(s.argmax) - s.value).abs() < 1e-12);
    }

    #[test]
    fn two_point_support() {
        let d = make_ac(1.0, 0.5).unwrap();
        let s = support_estimate(&d, Point::new(0.0, 1.0), 1000);
        assert_eq!(s.value, 0.5);
        assert_eq!(s.argmax, Point::new(1.0, 0.5));
    }

    #[test]
    fn half_disk_support() {
        let d = make_pv(1.0, 1.0 + 1e-9).unwrap();
        let s = support_estimate(&d, Point::new(1.0, 0.0), 1000);
        assert!(s.value.abs() < 1e-6, "{}", s.value);
        assert_eq!(analytic_support(&d, Point::new(1.0, 0.0)).unwrap().0, 0.0);
    }

    #[test]
    fn support_monotone_in_n() {
        let d = make_pv(1.0, 1.3).unwrap();
        let a = Point::new(0.6, 0.8);
        let lo = support_estimate(&d, a, 1000).value;
        let hi = support_estimate(&d, a, 100_000).value;
        assert!(hi - lo >= -1e-9);
        assert!(hi - lo <= 0.005 * d.bounding_box().half_width());
    }

    #[test]
    fn lp_examples() {
        let disk = make_battery(0.999, 1.0).unwrap();
        let h = outer_fit_lp(&disk, &square()).unwrap();
        assert!((h.alpha - 1.0).abs() < 1e-6 && h.beta.norm() < 1e-6);
        let ac = outer_fit_lp(&make_ac(1.0, 0.5).unwrap(), &square()).unwrap();
        assert!((ac.alpha - 0.5).abs() < 1e-6);
        assert!(
            (ac.beta - Point::new(0.5, 0.0)).norm() < 1e-6,
            "{:?}",
            ac.beta
        );
        let hex = Arc::new(regular_prototype(6, 0.0).unwrap());
        let h = outer_fit_lp(&make_battery(0.9999, 1.0).unwrap(), &hex).unwrap();
        assert!((h.alpha - 1.0).abs() < 1e-6, "{}", h.alpha);
    }

    #[test]
    fn grid_inner_examples() {
        let sq = square();
        let disk = make_battery(0.999, 1.0).unwrap();
        let h = inner_fit_grid(&disk, &sq, 41, 1e-4, Execution::default()).unwrap();
        assert!(
            (h.alpha - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.01,
            "{}",
            h.alpha
        );
        let pv = make_pv(1.0, 1.0 + 1e-9).unwrap();
        let h = inner_fit_grid(&pv, &sq, 41, 1e-4, Execution::default()).unwrap();
        assert!((h.alpha - 0.4472).abs() < 0.01, "{}", h.alpha);
        assert!(
            (h.beta - Point::new(-0.4472, 0.0)).norm() < 0.02,
            "{:?}",
            h.beta
        );
        let b = make_battery(1.0, 2.0).unwrap();
        let h = inner_fit_grid(&b, &sq, 41, 1e-4, Execution::default()).unwrap();
        assert!((h.alpha - 1.0).abs() < 0.01, "{}", h.alpha);
    }

    #[test]
    fn two_ac_sumset() {
        let d = make_ac(1.0, 0.5).unwrap();
        let pts = minkowski_sample(&[d.clone(), d], 1000, 7, Execution::default());
        let support = [Point::ORIGIN, Point::new(1.0, 0.5), Point::new(2.0, 1.0)];
        assert!(pts.iter().all(|x| support.contains(x)));
        for s in support {
            assert!(pts.contains(&s));
        }
    }

    #[test]
    fn disk_sumset() {
        let d = make_battery(0.999, 1.0).unwrap();
        let one = minkowski_sample(std::slice::from_ref(&d), 1000, 1, Execution::default());
        assert!(one.iter().all(|x| d.contains(*x, 0.0)));
        let two = minkowski_sample(&[d.clone(), d], 10_000, 1, Execution::default());
        assert!(two.iter().all(|x| x.norm() <= 2.0 + 1e-12));
        assert!(two.iter().any(|x| x.norm() > 1.9));
    }

    #[test]
    fn sampling_independent_of_execution() {
        let d = make_pv(1.0, 1.2).unwrap();
        let a = minkowski_sample(&[d.clone(), d.clone()], 5000, 3, Execution::Sequential);
        let b = minkowski_sample(&[d.clone(), d], 5000, 3, Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn decomposition_and_distance() {
        let sq = square();
        let hs = [
            Homothet::new(Arc::clone(&sq), 1.0, Point::new(1.0, 0.0)),
            Homothet::new(Arc::clone(&sq), 2.0, Point::new(0.0, 3.0)),
        ];
        let x = Point::new(2.5, 4.0);
        let parts = decompose_point(&hs, x);
        let sum = parts.iter().fold(Point::ORIGIN, |a, &p| a + p);
        assert!((sum - x).norm() < 1e-12);
        assert!(parts.iter().zip(&hs).all(|(p, h)| h.contains(*p, 1e-12)));
        let h = Homothet::new(sq, 1.0, Point::ORIGIN);
        assert_eq!(point_polygon_distance(Point::new(0.5, 0.0), &h), 0.0);
        assert!((point_polygon_distance(Point::new(4.0, 5.0), &h) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn csv_header() {
        let s = to_csv(&[Point::new(1.0, -2.0)]);
        assert_eq!(s, "p,q\n1,-2\n");
    }
}
