//! Outer and inner homothet fits.
//!
//! The outer fit minimizes `α` subject to one Putinar certificate per
//! (prototype edge, domain piece) pair: `a_i·(β − x) + α b_i` must be
//! positive on every piece. The inner fit alternates a bisection on `α`
//! (each probe an SOS feasibility check that the homothet sits inside the
//! domain) with a translation of `β` away from the binding edges.
//!
//! All programs are built in normalized coordinates `x̃ = (x − c) / L`, where
//! `c` is the bounding-box center and `L` its half-width, and mapped back
//! afterwards.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{march, FlexDomain};
use crate::polynomial::{Monomial, Poly2};
use crate::prototype::{clip_polygon, polygon_area, Halfplane, Homothet, PrototypePolygon};
use crate::soscompile::{
    default_certificate_degree, multiplier_degree, solve, sos_constraint, AffinePoly, ConicProgram,
    SolveStatus, SosBlock, Values, VarId,
};
use crate::{Error, Point, Result};

/// Margin subtracted from outer targets to turn `>= 0` into `> 0`.
pub const EPS_POS: f64 = 1e-7;
/// Samples per certified region used by the certificate audit.
pub const AUDIT_SAMPLES: usize = 1000;
/// Lowest accepted inner certificate margin (normalized units). A constraint
/// that coincides with a cell edge has margin exactly zero.
pub const INNER_MARGIN_TOL: f64 = 1e-7;
const AUDIT_SEED: u64 = 0xa0d1_7000;
const EDGE_SAMPLES: usize = 128;

/// Certificate degree settings shared by the outer and inner fits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DegreeConfig {
    /// Even certificate degree; `None` picks `even_ceil(max deg g) + 2`.
    pub certificate_degree: Option<u32>,
    /// Retry once at `degree + 2` when sampling contradicts an infeasible
    /// certificate.
    pub escalate: bool,
}

impl Default for DegreeConfig {
    fn default() -> Self {
        Self {
            certificate_degree: None,
            escalate: true,
        }
    }
}

impl DegreeConfig {
    fn degree_for<'a>(&self, gs: impl IntoIterator<Item = &'a Poly2>) -> Result<u32> {
        match self.certificate_degree {
            Some(d) if d % 2 == 1 || d == 0 => Err(Error::InvalidParameter(format!(
                "certificate degree must be positive and even, got {d}"
            ))),
            Some(d) => Ok(d),
            None => Ok(default_certificate_degree(gs)),
        }
    }
}

/// Controls for the inner-fit heuristic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InnerFitParams {
    /// Absolute tolerance on `α` (power units).
    pub bisection_tol: f64,
    pub max_outer_iters: usize,
    /// Initial translation step as a fraction of the current `α`.
    pub epsilon_step: f64,
    /// Edge push, as a fraction of `α`, used by the binding-edge test.
    pub binding_slack: f64,
    /// Starting translation; `None` picks a deep interior point.
    pub beta_init: Option<Point>,
}

impl Default for InnerFitParams {
    fn default() -> Self {
        Self {
            bisection_tol: 1e-3,
            max_outer_iters: 50,
            epsilon_step: 0.1,
            binding_slack: 1e-3,
            beta_init: None,
        }
    }
}

impl InnerFitParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.bisection_tol > 0.0 && self.bisection_tol.is_finite()) {
            return bad(format!(
                "bisection_tol must be positive, got {}",
                self.bisection_tol
            ));
        }
        if self.max_outer_iters == 0 {
            return bad("max_outer_iters must be positive".into());
        }
        if !(self.epsilon_step > 0.0 && self.epsilon_step < 1.0) {
            return bad(format!(
                "epsilon_step must lie in (0, 1), got {}",
                self.epsilon_step
            ));
        }
        if !(self.binding_slack > 0.0 && self.binding_slack.is_finite()) {
            return bad(format!(
                "binding_slack must be positive, got {}",
                self.binding_slack
            ));
        }
        if let Some(b) = self.beta_init {
            if !b.is_finite() {
                return bad("beta_init must be finite".into());
            }
        }
        Ok(())
    }
}

/// Result of [`fit_inner`].
#[derive(Clone, Debug)]
pub struct FitReport {
    pub homothet: Homothet,
    pub iterations: usize,
    /// `α` after the initial bisection and after every accepted translation.
    pub alpha_trace: Vec<f64>,
    pub binding_edges_final: Vec<usize>,
    /// `false` when `α` decreased along the path from the start to the final
    /// translation, i.e. the monotonicity assumption of the heuristic failed.
    pub monotonic: bool,
}

#[derive(Serialize)]
struct FitReportRepr<'a> {
    alpha: f64,
    beta: Point,
    iterations: usize,
    alpha_trace: &'a [f64],
    binding_edges: &'a [usize],
    monotonic: bool,
}

impl Serialize for FitReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FitReportRepr {
            alpha: self.homothet.alpha,
            beta: self.homothet.beta,
            iterations: self.iterations,
            alpha_trace: &self.alpha_trace,
            binding_edges: &self.binding_edges_final,
            monotonic: self.monotonic,
        }
        .serialize(s)
    }
}

/// A domain in normalized coordinates.
struct Scaled<'a> {
    domain: &'a FlexDomain,
    center: Point,
    scale: f64,
    /// Normalized constraints per piece (empty for point pieces).
    constraints: Vec<Vec<Poly2>>,
    cells: Vec<Vec<Halfplane>>,
}

impl<'a> Scaled<'a> {
    fn new(domain: &'a FlexDomain) -> Self {
        let bbox = domain.bounding_box();
        let center = bbox.center();
        let scale = bbox.half_width().max(1e-9);
        let constraints = domain
            .pieces()
            .iter()
            .map(|piece| {
                if piece.as_point().is_some() {
                    return Vec::new();
                }
                piece
                    .constraints()
                    .iter()
                    .map(|g| {
                        let h = g.pull_back(scale, center);
                        let m = h.max_abs_coeff();
                        if m > 0.0 {
                            h.scale(1.0 / m)
                        } else {
                            h
                        }
                    })
                    .collect()
            })
            .collect();
        let cells = domain
            .pieces()
            .iter()
            .map(|piece| {
                piece
                    .cell()
                    .iter()
                    .map(|h| Halfplane::new(h.normal, (h.offset - h.normal.dot(center)) / scale))
                    .collect()
            })
            .collect();
        Self {
            domain,
            center,
            scale,
            constraints,
            cells,
        }
    }

    fn scale_point(&self, x: Point) -> Point {
        (x - self.center) * (1.0 / self.scale)
    }

    fn unscale(&self, x: Point) -> Point {
        x * self.scale + self.center
    }

    /// `1000` points of piece `k` in normalized coordinates: half on the
    /// boundary (ray-marched), half interior (rejection sampled).
    fn piece_samples(&self, k: usize) -> Vec<Point> {
        let d = self.domain;
        let piece = &d.pieces()[k];
        let anchor = d.anchors()[k];
        let reach = 2.0 * d.bounding_box().diagonal();
        let rays = AUDIT_SAMPLES / 2;
        let mut out: Vec<Point> = (0..rays)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / rays as f64;
                march(piece, anchor, Point::new(t.cos(), t.sin()), reach)
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SEED ^ k as u64);
        let bbox = d.bounding_box();
        let mut tries = 0;
        while out.len() < AUDIT_SAMPLES && tries < 400 * AUDIT_SAMPLES {
            tries += 1;
            let x = bbox.sample(&mut rng);
            if piece.contains(x, 0.0) {
                out.push(x);
            }
        }
        while out.len() < AUDIT_SAMPLES {
            out.push(anchor);
        }
        out.into_iter().map(|x| self.scale_point(x)).collect()
    }
}

/// Accepts a solve only when the solution passes the feasibility checker.
fn accepted(prog: &ConicProgram) -> std::result::Result<Values, SolveStatus> {
    let out = solve(prog);
    match out.status {
        SolveStatus::Optimal | SolveStatus::Inaccurate => {
            let values = out.values.expect("values present for solved status");
            let report = prog.check(&values);
            if report.feasible {
                Ok(values)
            } else {
                log::debug!("solution rejected by checker: {report:?}");
                Err(SolveStatus::Inaccurate)
            }
        }
        s => Err(s),
    }
}

struct OuterProgram {
    prog: ConicProgram,
    alpha: VarId,
    beta: (VarId, VarId),
    blocks: Vec<(usize, SosBlock)>,
}

fn build_outer(
    sc: &Scaled,
    proto: &PrototypePolygon,
    degree: &DegreeConfig,
    bump: u32,
    alpha_cap: Option<f64>,
) -> Result<OuterProgram> {
    let mut prog = ConicProgram::new();
    let alpha = prog.add_scalar(true);
    let bp = prog.add_scalar(false);
    let bq = prog.add_scalar(false);
    let mut blocks = Vec::new();
    for (k, piece) in sc.domain.pieces().iter().enumerate() {
        if let Some(c) = piece.as_point() {
            // a_i·β + α b_i >= a_i·c, exactly.
            let c = sc.scale_point(c);
            for e in proto.edges() {
                prog.add_inequality(
                    vec![(bp, e.normal.p), (bq, e.normal.q), (alpha, e.offset)],
                    e.normal.dot(c),
                )?;
            }
            continue;
        }
        let gs = &sc.constraints[k];
        let d = degree.degree_for(gs)? + bump;
        let mults: Vec<(Poly2, u32)> = gs
            .iter()
            .map(|g| (g.clone(), multiplier_degree(d, g)))
            .collect();
        for e in proto.edges() {
            let mut target = AffinePoly::default();
            target
                .add_var(Monomial::ONE, bp, e.normal.p)
                .add_var(Monomial::ONE, bq, e.normal.q)
                .add_var(Monomial::ONE, alpha, e.offset)
                .add_constant(Monomial::ONE, -EPS_POS)
                .add_constant(Monomial::new(1, 0), -e.normal.p)
                .add_constant(Monomial::new(0, 1), -e.normal.q);
            blocks.push((k, sos_constraint(&mut prog, &target, &mults, d)?));
        }
    }
    match alpha_cap {
        None => prog.minimize(vec![(alpha, 1.0)])?,
        Some(cap) => {
            prog.add_inequality(vec![(alpha, -1.0)], -cap)?;
            // t >= |L β̃ + c| componentwise, minimize t_p + t_q.
            let tp = prog.add_scalar(true);
            let tq = prog.add_scalar(true);
            let l = sc.scale;
            prog.add_inequality(vec![(tp, 1.0), (bp, -l)], sc.center.p)?;
            prog.add_inequality(vec![(tp, 1.0), (bp, l)], -sc.center.p)?;
            prog.add_inequality(vec![(tq, 1.0), (bq, -l)], sc.center.q)?;
            prog.add_inequality(vec![(tq, 1.0), (bq, l)], -sc.center.q)?;
            prog.minimize(vec![(tp, 1.0), (tq, 1.0)])?;
        }
    }
    Ok(OuterProgram {
        prog,
        alpha,
        beta: (bp, bq),
        blocks,
    })
}

fn audit_blocks(sc: &Scaled, blocks: &[(usize, SosBlock)], values: &Values) -> bool {
    let mut samples: Vec<Option<Vec<Point>>> = vec![None; sc.domain.pieces().len()];
    let mut ok = true;
    for (k, block) in blocks {
        let pts = samples[*k].get_or_insert_with(|| sc.piece_samples(*k));
        ok &= block.audit(values, pts).passed();
    }
    ok
}

/// Tightest outer homothet `H[ᾱ, β̄] ⊇ d`.
///
/// A second solve at `α <= ᾱ (1 + 1e-7)` picks the translation with least
/// `‖β‖₁`. Discrete point pieces enter as exact linear constraints.
pub fn fit_outer(
    d: &FlexDomain,
    proto: &Arc<PrototypePolygon>,
    degree: &DegreeConfig,
) -> Result<Homothet> {
    let sc = Scaled::new(d);
    let bumps: &[u32] = if degree.escalate { &[0, 2] } else { &[0] };
    let mut last = SolveStatus::Failed;
    for &bump in bumps {
        let first = build_outer(&sc, proto, degree, bump, None)?;
        let values = match accepted(&first.prog) {
            Ok(v) => v,
            Err(s) => {
                log::warn!("outer fit at degree bump {bump} failed: {s:?}");
                last = s;
                continue;
            }
        };
        let a_star = values.scalar(first.alpha);
        let cap = a_star * (1.0 + 1e-7) + 1e-9;
        let second = build_outer(&sc, proto, degree, bump, Some(cap))?;
        let (prog, values) = match accepted(&second.prog) {
            Ok(v) => (second, v),
            Err(s) => {
                log::warn!("outer tie-break solve failed ({s:?}); keeping first solution");
                (first, values)
            }
        };
        audit_blocks(&sc, &prog.blocks, &values);
        let alpha = values.scalar(prog.alpha) * sc.scale;
        let beta = sc.unscale(Point::new(
            values.scalar(prog.beta.0),
            values.scalar(prog.beta.1),
        ));
        return Ok(Homothet::new(Arc::clone(proto), alpha, beta));
    }
    Err(Error::Solver(format!(
        "outer fit: solver returned {last:?}"
    )))
}

/// Vertices and evenly spaced edge points of a polygon loop.
fn loop_samples(poly: &[Point], per_edge: usize) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n * (per_edge + 1));
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in 0..per_edge {
            out.push(a.lerp(b, j as f64 / per_edge as f64));
        }
    }
    out
}

/// Uniform samples in a convex polygon (fan triangulation).
fn polygon_samples(poly: &[Point], n: usize, rng: &mut impl Rng) -> Vec<Point> {
    let tris: Vec<(Point, Point, Point, f64)> = (1..poly.len().saturating_sub(1))
        .map(|i| {
            let (a, b, c) = (poly[0], poly[i], poly[i + 1]);
            (a, b, c, polygon_area(&[a, b, c]).abs())
        })
        .collect();
    let total: f64 = tris.iter().map(|t| t.3).sum();
    if total <= 0.0 {
        return vec![poly[0]; n];
    }
    (0..n)
        .map(|_| {
            let mut r = rng.gen::<f64>() * total;
            let t = tris
                .iter()
                .find(|t| {
                    r -= t.3;
                    r <= 0.0
                })
                .unwrap_or(tris.last().unwrap());
            let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            t.0 + (t.1 - t.0) * u + (t.2 - t.0) * v
        })
        .collect()
}

/// Membership of the homothet's vertices and edge points in `d`.
fn sampled_inside(d: &FlexDomain, h: &Homothet) -> bool {
    loop_samples(&h.vertices(), EDGE_SAMPLES)
        .into_iter()
        .all(|x| d.contains(x, 0.0))
}

enum Certificate {
    Certified,
    Refuted,
}

/// Certifies `g >= 0` on the convex polygon `region` (normalized
/// coordinates) by maximizing `t` with `g − t − Σσᵢℓᵢ ∈ Σ`.
fn certify_on_region(
    g: &Poly2,
    region: &[Halfplane],
    poly: &[Point],
    d_cert: u32,
) -> Result<Certificate> {
    let ells: Vec<Poly2> = region
        .iter()
        .map(|h| Poly2::linear(-h.normal.p, -h.normal.q, h.offset))
        .collect();
    let mut prog = ConicProgram::new();
    let t = prog.add_scalar(false);
    prog.add_inequality(vec![(t, -1.0)], -1.0)?;
    let mut target = AffinePoly::from_poly(g);
    target.add_var(Monomial::ONE, t, -1.0);
    let mults: Vec<(Poly2, u32)> = ells
        .iter()
        .map(|l| (l.clone(), multiplier_degree(d_cert, l)))
        .collect();
    let block = sos_constraint(&mut prog, &target, &mults, d_cert)?;
    prog.minimize(vec![(t, -1.0)])?;
    let values = match accepted(&prog) {
        Ok(v) => v,
        Err(_) => return Ok(Certificate::Refuted),
    };
    if values.scalar(t) < -INNER_MARGIN_TOL {
        return Ok(Certificate::Refuted);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SEED);
    let mut samples = poly.to_vec();
    samples.extend(polygon_samples(
        poly,
        AUDIT_SAMPLES - poly.len().min(AUDIT_SAMPLES),
        &mut rng,
    ));
    if block.audit(&values, &samples).passed() {
        Ok(Certificate::Certified)
    } else {
        Ok(Certificate::Refuted)
    }
}

/// More than one region-type piece, and at least one of them without a cell.
/// Isolated points have no area and never help cover a homothet.
fn lacks_cells(d: &FlexDomain) -> bool {
    let mut regions = d.pieces().iter().filter(|p| p.as_point().is_none());
    let n = regions.clone().count();
    n > 1 && regions.any(|p| p.cell().is_empty())
}

/// SOS check that `H[α, β] ⊆ d`.
///
/// Each piece is certified over the homothet clipped to the piece's cell, so
/// a homothet straddling several pieces is accepted when every part lies in
/// its own piece. A multi-piece domain whose pieces carry no cells falls back
/// to sampled containment. An infeasible certificate that sampling
/// contradicts is retried once at two degrees higher when `escalate` is set.
pub fn check_inner(
    d: &FlexDomain,
    proto: &Arc<PrototypePolygon>,
    alpha: f64,
    beta: Point,
    degree: &DegreeConfig,
) -> Result<bool> {
    if d.is_discrete() {
        return Err(Error::DiscreteDomain(
            "inner approximations do not exist for discrete flexibility domains",
        ));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let h = Homothet::new(Arc::clone(proto), alpha, beta);
    if !sampled_inside(d, &h) {
        return Ok(false);
    }
    let sc = Scaled::new(d);
    let hs = Homothet::new(Arc::clone(proto), alpha / sc.scale, sc.scale_point(beta));
    if lacks_cells(d) {
        log::debug!("pieces have no separating cells; containment checked by sampling only");
        return Ok(true);
    }
    let verts = hs.vertices();
    let hull = hs.halfspaces();
    let mut covered_area = 0.0;
    for (k, piece) in d.pieces().iter().enumerate() {
        if piece.as_point().is_some() {
            continue;
        }
        let mut poly = verts.clone();
        for c in &sc.cells[k] {
            poly = clip_polygon(&poly, c);
            if poly.len() < 3 {
                break;
            }
        }
        let area = if poly.len() >= 3 {
            polygon_area(&poly)
        } else {
            0.0
        };
        if area <= 1e-12 * hs.area() {
            continue;
        }
        covered_area += area;
        let region: Vec<Halfplane> = hull.iter().chain(&sc.cells[k]).copied().collect();
        let gs = &sc.constraints[k];
        let base = degree.degree_for(gs)?;
        for g in gs {
            let mut ok = matches!(
                certify_on_region(g, &region, &poly, base)?,
                Certificate::Certified
            );
            if !ok && degree.escalate {
                let region_inside = {
                    let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SEED);
                    let mut pts = loop_samples(&poly, EDGE_SAMPLES);
                    pts.extend(polygon_samples(&poly, 256, &mut rng));
                    pts.iter().all(|&x| g.eval(x) >= 0.0)
                };
                if region_inside {
                    log::debug!("escalating certificate degree to {}", base + 2);
                    ok = matches!(
                        certify_on_region(g, &region, &poly, base + 2)?,
                        Certificate::Certified
                    );
                }
            }
            if !ok {
                return Ok(false);
            }
        }
    }
    if (covered_area - hs.area()).abs() > 1e-9 * hs.area().max(1e-12) {
        log::warn!("piece cells do not cover the homothet; rejecting");
        return Ok(false);
    }
    Ok(true)
}

/// Largest `α` (within `bisection_tol`) with `check_inner(α, β)` true.
///
/// The bracket is `[1e-3·L, α_outer]` with `L` the bounding-box half-width.
pub fn max_alpha_bisection(
    d: &FlexDomain,
    proto: &Arc<PrototypePolygon>,
    beta: Point,
    alpha_outer: f64,
    params: &InnerFitParams,
    degree: &DegreeConfig,
) -> Result<f64> {
    let seed = 1e-3 * d.bounding_box().half_width();
    if !check_inner(d, proto, seed, beta, degree)? {
        return Err(Error::BetaOutsideDomain(beta));
    }
    let (mut lo, mut hi) = (seed, alpha_outer.max(seed));
    if check_inner(d, proto, hi, beta, degree)? {
        return Ok(hi);
    }
    while hi - lo > params.bisection_tol {
        let mid = 0.5 * (lo + hi);
        if check_inner(d, proto, mid, beta, degree)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Edges whose outward displacement by `push` alone breaks containment,
/// tested by sampling the displaced edge against `d`.
pub fn detect_binding_edges(
    d: &FlexDomain,
    proto: &PrototypePolygon,
    alpha: f64,
    beta: Point,
    push: f64,
) -> Vec<usize> {
    let n = proto.n_edges();
    let rows: Vec<Halfplane> = proto
        .edges()
        .iter()
        .map(|e| Halfplane::new(e.normal, alpha * e.offset + e.normal.dot(beta)))
        .collect();
    (0..n)
        .filter(|&i| {
            let mut pushed = rows[i];
            pushed.offset += push;
            let prev = &rows[(i + n - 1) % n];
            let next = &rows[(i + 1) % n];
            let ends = (
                crate::prototype::line_intersection(prev, &pushed),
                crate::prototype::line_intersection(&pushed, next),
            );
            let (Some(a), Some(b)) = ends else {
                return false;
            };
            (0..=EDGE_SAMPLES).any(|j| !d.contains(a.lerp(b, j as f64 / EDGE_SAMPLES as f64), 0.0))
        })
        .collect()
}

/// Centroid of membership samples when it lies in `d`, otherwise the
/// accepted sample farthest from the boundary samples.
pub fn default_beta_init(d: &FlexDomain) -> Result<Point> {
    if d.is_discrete() {
        return Err(Error::DiscreteDomain("a discrete domain has no interior"));
    }
    let bbox = d.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe7a_0001);
    let mut hits = Vec::new();
    for _ in 0..40_000 {
        let x = bbox.sample(&mut rng);
        if d.contains(x, 0.0) {
            hits.push(x);
        }
    }
    if hits.is_empty() {
        return Ok(d.anchors()[0]);
    }
    let centroid = hits.iter().fold(Point::ORIGIN, |a, &x| a + x) * (1.0 / hits.len() as f64);
    if d.contains(centroid, 0.0) {
        return Ok(centroid);
    }
    let boundary = d.sample_boundary(720)?;
    let depth = |x: Point| {
        boundary
            .iter()
            .map(|&b| (b - x).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = (f64::NEG_INFINITY, centroid);
    for &x in hits.iter().step_by((hits.len() / 400).max(1)) {
        let dx = depth(x);
        if dx > best.0 {
            best = (dx, x);
        }
    }
    Ok(best.1)
}

/// Two-step inner fit: bisection on `α` at fixed `β`, then translation of
/// `β` along `−Σ a_i` over the binding edges, repeated until no step gains
/// more than `bisection_tol`.
pub fn fit_inner(
    d: &FlexDomain,
    proto: &Arc<PrototypePolygon>,
    params: &InnerFitParams,
    degree: &DegreeConfig,
) -> Result<FitReport> {
    if d.is_discrete() {
        return Err(Error::DiscreteDomain(
            "inner approximations do not exist for discrete flexibility domains",
        ));
    }
    params.validate()?;
    if lacks_cells(d) {
        log::warn!(
            "pieces have no separating cells; inner containment is checked by sampling only"
        );
    }
    let alpha_outer = fit_outer(d, proto, degree)?.alpha;
    let beta0 = match params.beta_init {
        Some(b) => b,
        None => default_beta_init(d)?,
    };
    let bisect = |b: Point| max_alpha_bisection(d, proto, b, alpha_outer, params, degree);
    let push = |a: f64| (params.binding_slack * a).max(2.0 * params.bisection_tol);

    let mut beta = beta0;
    let mut alpha = bisect(beta)?;
    let mut trace = vec![alpha];
    let mut eps = params.epsilon_step * alpha;
    let mut iterations = 0;
    let mut binding = detect_binding_edges(d, proto, alpha, beta, push(alpha));
    while iterations < params.max_outer_iters {
        iterations += 1;
        let dir = binding
            .iter()
            .fold(Point::ORIGIN, |acc, &i| acc - proto.normal(i));
        if dir.norm() < 1e-9 {
            break;
        }
        let dir = dir * (1.0 / dir.norm());
        let mut improved = false;
        while eps >= params.bisection_tol {
            let cand = beta + dir * eps;
            let next = match bisect(cand) {
                Ok(a) => Some(a),
                Err(Error::BetaOutsideDomain(_)) => None,
                Err(e) => return Err(e),
            };
            match next {
                Some(a) if a > alpha + params.bisection_tol => {
                    beta = cand;
                    alpha = a;
                    trace.push(alpha);
                    improved = true;
                    break;
                }
                _ => eps *= 0.5,
            }
        }
        if !improved {
            break;
        }
        binding = detect_binding_edges(d, proto, alpha, beta, push(alpha));
    }

    let monotonic = monotone_along(&bisect, beta0, beta, trace[0], alpha, params.bisection_tol)?;
    if !monotonic {
        log::warn!("alpha is not monotone along the translation path");
    }
    Ok(FitReport {
        homothet: Homothet::new(Arc::clone(proto), alpha, beta),
        iterations,
        alpha_trace: trace,
        binding_edges_final: binding,
        monotonic,
    })
}

/// Samples `α` at 1/4, 1/2, 3/4 of the segment `β₀ → β*` and checks it is
/// nondecreasing (within `tol`) from `α₀` to `α*`.
fn monotone_along(
    bisect: &dyn Fn(Point) -> Result<f64>,
    b0: Point,
    b1: Point,
    a0: f64,
    a1: f64,
    tol: f64,
) -> Result<bool> {
    if (b1 - b0).norm() < 1e-12 {
        return Ok(true);
    }
    let mut prev = a0;
    for s in [0.25, 0.5, 0.75] {
        let a = match bisect(b0.lerp(b1, s)) {
            Ok(a) => a,
            Err(Error::BetaOutsideDomain(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        if a < prev - tol {
            return Ok(false);
        }
        prev = a;
    }
    Ok(a1 >= prev - tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_ac, make_battery, make_pv};
    use crate::prototype::regular_prototype;

    fn square() -> Arc<PrototypePolygon> {
        Arc::new(regular_prototype(4, 0.0).unwrap())
    }

    fn disk() -> FlexDomain {
        make_battery(0.999, 1.0).unwrap()
    }

    #[test]
    fn outer_disk_square() {
        let h = fit_outer(&disk(), &square(), &DegreeConfig::default()).unwrap();
        assert!((h.alpha - 1.0).abs() < 1e-3, "{}", h.alpha);
        assert!(h.beta.norm() < 1e-3);
    }

    #[test]
    fn outer_two_points() {
        let h = fit_outer(
            &make_ac(1.0, 0.5).unwrap(),
            &square(),
            &DegreeConfig::default(),
        )
        .unwrap();
        // Any β_q in [0, 0.5] covers both points; least ‖β‖₁ picks 0.
        assert!((h.alpha - 0.5).abs() < 1e-5, "{}", h.alpha);
        assert!(
            (h.beta - Point::new(0.5, 0.0)).norm() < 1e-5,
            "{:?}",
            h.beta
        );
    }

    #[test]
    fn outer_half_disk_tie_break() {
        let h = fit_outer(
            &make_pv(1.0, 1.0 + 1e-9).unwrap(),
            &square(),
            &DegreeConfig::default(),
        );
        let h = h.unwrap();
        assert!((h.alpha - 1.0).abs() < 1e-3);
        assert!(h.beta.norm() < 1e-3, "{:?}", h.beta);
    }

    #[test]
    fn inner_checks_on_disk() {
        let (d, sq, deg) = (disk(), square(), DegreeConfig::default());
        assert!(check_inner(&d, &sq, 0.5, Point::ORIGIN, &deg).unwrap());
        assert!(!check_inner(&d, &sq, 0.8, Point::ORIGIN, &deg).unwrap());
        assert!(!check_inner(&d, &sq, 0.1, Point::new(0.95, 0.0), &deg).unwrap());
    }

    #[test]
    fn inner_check_refuses_discrete() {
        let d = make_ac(1.0, 0.5).unwrap();
        let r = check_inner(&d, &square(), 0.1, Point::ORIGIN, &DegreeConfig::default());
        assert!(matches!(r, Err(Error::DiscreteDomain(_))));
    }

    #[test]
    fn bisection_inscribed_square() {
        let params = InnerFitParams::default();
        let a = max_alpha_bisection(
            &disk(),
            &square(),
            Point::ORIGIN,
            1.0,
            &params,
            &DegreeConfig::default(),
        )
        .unwrap();
        assert!((0.7054..=0.7078).contains(&a), "{a}");
    }

    #[test]
    fn bisection_offset_square() {
        // (0.2 + a)² + a² = 1  ⇒  a = 0.6 (within the disk radius 0.999 domain)
        let params = InnerFitParams::default();
        let a = max_alpha_bisection(
            &disk(),
            &square(),
            Point::new(0.2, 0.0),
            1.0,
            &params,
            &DegreeConfig::default(),
        )
        .unwrap();
        assert!((a - 0.6).abs() < 3e-3, "{a}");
    }

    #[test]
    fn bisection_rejects_outside_beta() {
        let params = InnerFitParams::default();
        let r = max_alpha_bisection(
            &disk(),
            &square(),
            Point::new(2.0, 0.0),
            1.0,
            &params,
            &DegreeConfig::default(),
        );
        assert!(matches!(r, Err(Error::BetaOutsideDomain(_))));
    }

    #[test]
    fn binding_edges_inscribed_square() {
        let a = 1.0 / 2f64.sqrt() - 1e-4;
        let b = detect_binding_edges(&disk(), &square(), a, Point::ORIGIN, 2e-3);
        assert_eq!(b, vec![0, 1, 2, 3]);
    }

    #[test]
    fn binding_edges_offset_square() {
        let sq = square();
        let b = detect_binding_edges(&disk(), &sq, 0.5995, Point::new(0.2, 0.0), 2e-3);
        assert!(!b.is_empty());
        let left = (0..4).find(|&i| sq.normal(i).p < -0.9).unwrap();
        assert!(!b.contains(&left), "{b:?}");
    }

    #[test]
    fn inner_fit_from_center_stops_immediately() {
        let params = InnerFitParams {
            beta_init: Some(Point::ORIGIN),
            ..Default::default()
        };
        let r = fit_inner(&disk(), &square(), &params, &DegreeConfig::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.alpha_trace.len(), 1);
        assert!((r.homothet.alpha - 1.0 / 2f64.sqrt()).abs() < 3e-3);
    }

    #[test]
    fn params_validation() {
        let bad = InnerFitParams {
            epsilon_step: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(InnerFitParams::default().validate().is_ok());
    }

    #[test]
    fn report_json_keys() {
        let r = FitReport {
            homothet: Homothet::new(square(), 1.0, Point::ORIGIN),
            iterations: 2,
            alpha_trace: vec![0.5, 1.0],
            binding_edges_final: vec![0],
            monotonic: true,
        };
        let v = serde_json::to_value(&r).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        assert_eq!(
            keys,
            [
                "alpha",
                "alpha_trace",
                "beta",
                "binding_edges",
                "iterations",
                "monotonic"
            ]
        );
    }
}
